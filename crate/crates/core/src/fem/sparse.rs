//! Compressed sparse row storage and Krylov solvers for the Newton systems.

use crate::sum::pairwise;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given (possibly duplicated, unsorted) pattern.
    pub fn with_pattern(n: usize, mut entries: Vec<(usize, usize)>) -> Self {
        entries.sort_unstable();
        entries.dedup();
        let mut row_ptr = vec![0; n + 1];
        for &(r, _) in &entries {
            row_ptr[r + 1] += 1;
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        let cols: Vec<usize> = entries.iter().map(|e| e.1).collect();
        let nnz = cols.len();
        CsrMatrix { n, row_ptr, cols, vals: vec![0.0; nnz] }
    }

    pub fn clear(&mut self) {
        self.vals.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Slot of `(r, c)`; panics if the entry is outside the pattern.
    #[inline]
    pub fn position(&self, r: usize, c: usize) -> usize {
        let row = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        self.row_ptr[r] + row.binary_search(&c).expect("entry inside sparsity pattern")
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let k = self.position(r, c);
        self.vals[k] += v;
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let row = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        row.binary_search(&c).map_or(0.0, |k| self.vals[self.row_ptr[r] + k])
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[r] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    /// Largest `|A_rc - A_cr|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                worst = worst.max((self.vals[k] - self.get(self.cols[k], r)).abs());
            }
        }
        worst
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let terms: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    pairwise(&terms)
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

fn jacobi(a: &CsrMatrix) -> Vec<f64> {
    a.diagonal().into_iter().map(|d| if d.abs() > 0.0 { d.recip() } else { 1.0 }).collect()
}

/// Jacobi-preconditioned conjugate gradients for SPD `a`, starting from zero.
pub fn pcg(a: &CsrMatrix, b: &[f64], rel_tol: f64, max_iter: usize) -> (Vec<f64>, KrylovOutcome) {
    let n = a.n;
    let minv = jacobi(a);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return (x, KrylovOutcome { iterations: 0, relative_residual: 0.0, converged: true });
    }
    let mut z: Vec<f64> = r.iter().zip(&minv).map(|(r, m)| r * m).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut rel = 1.0;
    for it in 1..=max_iter {
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return (x, KrylovOutcome { iterations: it, relative_residual: rel, converged: false });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = norm(&r) / b_norm;
        if rel <= rel_tol {
            return (x, KrylovOutcome { iterations: it, relative_residual: rel, converged: true });
        }
        for i in 0..n {
            z[i] = r[i] * minv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    (x, KrylovOutcome { iterations: max_iter, relative_residual: rel, converged: false })
}

/// Jacobi-preconditioned BiCGSTAB for general nonsingular `a`.
pub fn bicgstab(a: &CsrMatrix, b: &[f64], rel_tol: f64, max_iter: usize) -> (Vec<f64>, KrylovOutcome) {
    let n = a.n;
    let minv = jacobi(a);
    let mut x = vec![0.0; n];
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return (x, KrylovOutcome { iterations: 0, relative_residual: 0.0, converged: true });
    }
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut zz = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut rel = 1.0;
    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || omega == 0.0 {
            return (x, KrylovOutcome { iterations: it, relative_residual: rel, converged: false });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            y[i] = p[i] * minv[i];
        }
        a.mul_vec(&y, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / b_norm <= rel_tol {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            rel = norm(&s) / b_norm;
            return (x, KrylovOutcome { iterations: it, relative_residual: rel, converged: true });
        }
        for i in 0..n {
            zz[i] = s[i] * minv[i];
        }
        a.mul_vec(&zz, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..n {
            x[i] += alpha * y[i] + omega * zz[i];
            r[i] = s[i] - omega * t[i];
        }
        rel = norm(&r) / b_norm;
        if rel <= rel_tol {
            return (x, KrylovOutcome { iterations: it, relative_residual: rel, converged: true });
        }
    }
    (x, KrylovOutcome { iterations: max_iter, relative_residual: rel, converged: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut pattern = Vec::new();
        for i in 0..n {
            pattern.push((i, i));
            if i + 1 < n {
                pattern.push((i, i + 1));
                pattern.push((i + 1, i));
            }
        }
        let mut a = CsrMatrix::with_pattern(n, pattern);
        for i in 0..n {
            a.add(i, i, 2.0 + 0.01 * i as f64);
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
                a.add(i + 1, i, -1.0);
            }
        }
        a
    }

    #[test]
    fn cg_solves_spd_system() {
        let a = laplacian_1d(50);
        assert_eq!(a.asymmetry(), 0.0);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let (x, out) = pcg(&a, &b, 1e-12, 500);
        assert!(out.converged);
        let mut ax = vec![0.0; 50];
        a.mul_vec(&x, &mut ax);
        let err: f64 = ax.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn bicgstab_solves_nonsymmetric_system() {
        let mut a = laplacian_1d(40);
        for i in 0..39 {
            a.add(i, i + 1, 0.3);
        }
        assert!(a.asymmetry() > 0.0);
        let b: Vec<f64> = (0..40).map(|i| 1.0 + i as f64 * 0.1).collect();
        let (x, out) = bicgstab(&a, &b, 1e-12, 500);
        assert!(out.converged);
        let mut ax = vec![0.0; 40];
        a.mul_vec(&x, &mut ax);
        let err: f64 = ax.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9);
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let a = laplacian_1d(5);
        let (x, out) = pcg(&a, &[0.0; 5], 1e-8, 10);
        assert_eq!(x, vec![0.0; 5]);
        assert_eq!(out.iterations, 0);
    }
}
