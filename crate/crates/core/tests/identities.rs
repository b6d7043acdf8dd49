//! The bilinear form A(u) rebuilt entry by entry from Kronecker deltas,
//! compared against the library and against the z.z + T(z)T(z) split.

mod common;

use common::*;
use proptest::prelude::*;
use singell_core::{make_params, v_map_mat, v_map_vec, Mat2, ParamsF64, Vec2};

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// A^{kl}_{ij}(u) with c = 2p/(2-p).
fn a_entry(p: f64, u: &Vec2<f64>, i: usize, k: usize, j: usize, l: usize) -> f64 {
    let c = 2.0 * p / (2.0 - p);
    let q = 1.0 + u.norm_sq();
    let left = delta(k, i) + c * u[i] * u[k] / q;
    let right = delta(l, j) + c * u[j] * u[l] / q;
    delta(k, l) * delta(i, j) + left * right
}

fn a_oracle(p: f64, u: &Vec2<f64>, z: &Mat2<f64>, zb: &Mat2<f64>) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for k in 0..2 {
            for j in 0..2 {
                for l in 0..2 {
                    s += a_entry(p, u, i, k, j, l) * z[(i, k)] * zb[(j, l)];
                }
            }
        }
    }
    s
}

fn apply_oracle(p: f64, u: &Vec2<f64>, z: &Mat2<f64>) -> Mat2<f64> {
    let mut out = Mat2::zero();
    for i in 0..2 {
        for k in 0..2 {
            for j in 0..2 {
                for l in 0..2 {
                    out[(i, k)] += a_entry(p, u, i, k, j, l) * z[(j, l)];
                }
            }
        }
    }
    out
}

fn params(p: f64) -> ParamsF64 {
    make_params(p).unwrap()
}

#[test]
fn pairing_matches_delta_formula_and_split() {
    let mut r = rng(11);
    for p in [1.2, 1.5, 1.8] {
        let pr = params(p);
        for _ in 0..100_000 {
            let u = vec_in(&mut r, 10.0);
            let z = mat_in(&mut r, 10.0);
            let zb = mat_in(&mut r, 10.0);
            let scale = (1.0 + pr.twist().abs()).powi(2) * z.frobenius() * zb.frobenius();
            let oracle = a_oracle(p, &u, &z, &zb);
            let split = z.dot(&zb) + pr.t_u(&u, &z) * pr.t_u(&u, &zb);
            assert!((pr.a_pair(&u, &z, &zb) - oracle).abs() <= 1e-12 * scale.max(1e-300));
            assert!((split - oracle).abs() <= 1e-12 * scale.max(1e-300));
        }
    }
}

#[test]
fn application_matches_delta_formula() {
    let mut r = rng(12);
    for p in [1.2, 1.5, 1.8] {
        let pr = params(p);
        for _ in 0..100_000 {
            let u = vec_in(&mut r, 10.0);
            let z = mat_in(&mut r, 10.0);
            let scale = (1.0 + pr.twist().abs()).powi(2) * z.frobenius();
            let diff = (pr.a_apply(&u, &z) - apply_oracle(p, &u, &z)).frobenius();
            assert!(diff <= 1e-12 * scale.max(1e-300), "{diff:e}");
            let form = pr.bilinear_a(&u).apply(&z);
            assert!((form - apply_oracle(p, &u, &z)).frobenius() <= 1e-12 * scale.max(1e-300));
        }
    }
}

#[test]
fn a_at_the_origin_of_u_adds_the_trace() {
    let pr = params(1.5);
    let mut r = rng(13);
    for _ in 0..100 {
        let z = mat_in(&mut r, 5.0);
        let d = (pr.a_apply(&Vec2::zero(), &z) - z - Mat2::identity() * z.trace()).frobenius();
        assert!(d <= 1e-14 * z.frobenius().max(1.0));
    }
}

fn mat() -> impl Strategy<Value = Mat2<f64>> {
    prop::array::uniform4(-10.0f64..10.0).prop_map(Mat2::from_flat)
}

fn vec() -> impl Strategy<Value = Vec2<f64>> {
    prop::array::uniform2(-10.0f64..10.0).prop_map(Vec2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn pairing_is_symmetric(u in vec(), z in mat(), zb in mat(), p in 1.05f64..1.95) {
        let pr = params(p);
        let (a, b) = (pr.a_pair(&u, &z, &zb), pr.a_pair(&u, &zb, &z));
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn pairing_is_bilinear(u in vec(), z in mat(), y in mat(), zb in mat(), s in -3.0f64..3.0) {
        let pr = params(1.5);
        let lhs = pr.a_pair(&u, &(z + y * s), &zb);
        let rhs = pr.a_pair(&u, &z, &zb) + s * pr.a_pair(&u, &y, &zb);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs() + rhs.abs()));
    }

    #[test]
    fn pairing_dominates_the_euclidean_norm(u in vec(), z in mat(), p in 1.05f64..1.95) {
        let pr = params(p);
        let q = pr.a_pair(&u, &z, &z);
        prop_assert!(q >= z.frobenius_sq() * (1.0 - 1e-12));
    }

    #[test]
    fn integrand_is_homogeneous_of_degree_zero_in_x(
        x in vec(), z in mat(), t in 0.01f64..100.0, p in 1.05f64..1.95,
    ) {
        prop_assume!(x.norm() > 1e-3);
        let pr = params(p);
        let a = pr.integrand_f(&x, &z).unwrap();
        let b = pr.integrand_f(&(x * t), &z).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn v_map_has_the_expected_norm(z in mat(), p in 1.05f64..3.0) {
        let v = v_map_mat(&z, p).unwrap();
        let n = z.frobenius();
        let expected = (1.0 + n * n).powf((p - 2.0) / 4.0) * n;
        prop_assert!((v.frobenius() - expected).abs() <= 1e-12 * (1.0 + expected));
    }

    #[test]
    fn v_map_preserves_direction(u in vec(), p in 1.05f64..3.0) {
        let v = v_map_vec(&u, p).unwrap();
        let cross = u[0] * v[1] - u[1] * v[0];
        prop_assert!(cross.abs() <= 1e-12 * (1.0 + u.norm() * v.norm()));
        prop_assert!(u.dot(&v) >= 0.0);
    }
}
