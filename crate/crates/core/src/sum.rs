//! Fixed-order pairwise summation. The split points depend only on the
//! length of the input, so results are bit-identical regardless of how the
//! terms were produced (serially or by a parallel map).

const BLOCK: usize = 16;

pub fn pairwise(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        return values.iter().fold(0.0, |acc, v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise(&values[..mid]) + pairwise(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_on_small_inputs() {
        assert_eq!(pairwise(&[]), 0.0);
        assert_eq!(pairwise(&[1.0, 2.0, 3.0]), 6.0);
    }

    #[test]
    fn accurate_on_long_sums() {
        let v = vec![0.1; 1 << 20];
        let exact = 0.1 * (1u64 << 20) as f64;
        assert!((pairwise(&v) - exact).abs() < 1e-9);
    }
}
