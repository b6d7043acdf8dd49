#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use singell_core::{Mat2, Vec2};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in the disk of radius `r`.
pub fn vec_in(rng: &mut ChaCha8Rng, r: f64) -> Vec2<f64> {
    loop {
        let v = Vec2::new(rng.gen_range(-r..=r), rng.gen_range(-r..=r));
        if v.norm() <= r {
            return v;
        }
    }
}

/// Random direction in matrix space with Frobenius norm uniform in `[0, r]`.
pub fn mat_in(rng: &mut ChaCha8Rng, r: f64) -> Mat2<f64> {
    loop {
        let m = Mat2::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = m.frobenius();
        if n > 1e-6 && n <= 1.0 {
            return m * (r * rng.gen::<f64>() / n);
        }
    }
}

pub fn unit_mat(rng: &mut ChaCha8Rng) -> Mat2<f64> {
    let m = mat_in(rng, 1.0);
    m * m.frobenius().recip()
}

/// Nonzero point with a random scale, so 0-homogeneity in `x` is exercised too.
pub fn point(rng: &mut ChaCha8Rng) -> Vec2<f64> {
    loop {
        let v = vec_in(rng, 1.0) * 10f64.powf(rng.gen_range(-2.0..2.0));
        if v.norm() > 1e-3 {
            return v;
        }
    }
}

pub fn basis(k: usize) -> Mat2<f64> {
    let mut f = [0.0; 4];
    f[k] = 1.0;
    Mat2::from_flat(f)
}

/// Central difference of a matrix-valued map along `dir`.
pub fn central_mat<F: Fn(&Mat2<f64>) -> Mat2<f64>>(f: F, z: &Mat2<f64>, dir: &Mat2<f64>, h: f64) -> Mat2<f64> {
    (f(&(*z + *dir * h)) - f(&(*z - *dir * h))) * (0.5 / h)
}

pub fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(f64::MIN_POSITIVE)
}
