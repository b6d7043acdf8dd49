//! Analytic derivatives against central finite differences.

mod common;

use common::*;
use proptest::prelude::*;
use singell_core::fem::{assemble_gradient, assemble_hessian, energy, mesh_disk, pcg, DiscreteField, Discretization};
use singell_core::{make_params, Mat2, ParamsF64, Vec2};

fn params(p: f64) -> ParamsF64 {
    make_params(p).unwrap()
}

const PS: [f64; 3] = [1.2, 1.5, 1.8];

#[test]
fn grad_f_z_matches_differences_of_f() {
    let mut r = rng(1);
    for p in PS {
        let pr = params(p);
        for _ in 0..100 {
            let x = point(&mut r);
            let z = mat_in(&mut r, 10.0);
            let h = 1e-6 * (1.0 + z.frobenius());
            let g = pr.grad_f_z(&x, &z).unwrap();
            let mut fd = Mat2::zero();
            for k in 0..4 {
                let e = basis(k);
                let d = (pr.integrand_f(&x, &(z + e * h)).unwrap() - pr.integrand_f(&x, &(z - e * h)).unwrap()) / (2.0 * h);
                fd += e * d;
            }
            let err = rel((fd - g).frobenius(), g.frobenius());
            assert!(err <= 1e-6, "p = {p}, z = {z:?}: {err:e}");
        }
    }
}

#[test]
fn hessian_matches_second_differences_of_f() {
    let mut r = rng(2);
    for p in PS {
        let pr = params(p);
        for _ in 0..100 {
            let x = point(&mut r);
            let z = mat_in(&mut r, 10.0);
            let l = unit_mat(&mut r);
            let h = 1e-4 * (1.0 + z.frobenius());
            let f = |t: f64| pr.integrand_f(&x, &(z + l * t)).unwrap();
            let fd = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
            let exact = pr.hess_f_zz(&x, &z, &l).unwrap();
            let err = rel((fd - exact).abs(), exact.abs());
            assert!(err <= 1e-4, "p = {p}, z = {z:?}: {err:e}");
        }
    }
}

#[test]
fn d_z_coeff_a_matches_differences() {
    let mut r = rng(3);
    for p in PS {
        let pr = params(p);
        for _ in 0..100 {
            let u = vec_in(&mut r, 3.0);
            let z = mat_in(&mut r, 10.0);
            let form = pr.d_z_coeff_a(&u, &z);
            let h = 1e-6 * (1.0 + z.frobenius());
            let mut err: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for k in 0..4 {
                let e = basis(k);
                let fd = central_mat(|w| pr.coeff_a(&u, w), &z, &e, h);
                let exact = form.apply(&e);
                err = err.max((fd - exact).frobenius());
                scale = scale.max(exact.frobenius());
            }
            assert!(rel(err, scale) <= 1e-5, "p = {p}: {:e}", rel(err, scale));
        }
    }
}

#[test]
fn d_u_coeff_a_matches_differences() {
    let mut r = rng(4);
    for p in PS {
        let pr = params(p);
        for _ in 0..100 {
            let u = vec_in(&mut r, 3.0);
            let z = mat_in(&mut r, 10.0);
            let exact = pr.d_u_coeff_a(&u, &z);
            let h = 1e-6 * (1.0 + u.norm());
            let scale = exact[0].frobenius().max(exact[1].frobenius());
            for k in 0..2 {
                let mut e = Vec2::zero();
                e.0[k] = h;
                let fd = (pr.coeff_a(&(u + e), &z) - pr.coeff_a(&(u - e), &z)) * (0.5 / h);
                let err = rel((fd - exact[k]).frobenius(), scale);
                assert!(err <= 1e-5, "p = {p}, k = {k}: {err:e}");
            }
        }
    }
}

fn perturbed_interpolant(h: f64, seed: u64) -> (singell_core::fem::DiskMesh, DiscreteField) {
    let mesh = mesh_disk(h, true).unwrap();
    let mut w = DiscreteField::singular_interpolant(&mesh);
    let mut r = rng(seed);
    for (v, b) in w.values.iter_mut().zip(&mesh.boundary) {
        if !b {
            *v += vec_in(&mut r, 0.2);
        }
    }
    (mesh, w)
}

#[test]
fn assembled_gradient_matches_energy_differences() {
    let pr = params(1.5);
    let (mesh, w) = perturbed_interpolant(0.3, 5);
    let disc = Discretization::new(&mesh).unwrap();
    let g = assemble_gradient(&pr, &mesh, &w).unwrap();
    let x = disc.free_vector(&w);
    let mut r = rng(6);
    for _ in 0..20 {
        let d: Vec<f64> = (0..x.len()).map(|_| rand::Rng::gen_range(&mut r, -1.0..1.0)).collect();
        let eps = 1e-5;
        let at = |t: f64| {
            let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            energy(&pr, &mesh, &disc.with_free(&w, &y)).unwrap()
        };
        let fd = (at(eps) - at(-eps)) / (2.0 * eps);
        let exact: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        let err = rel((fd - exact).abs(), exact.abs());
        assert!(err <= 1e-6, "{err:e}");
    }
}

#[test]
fn assembled_hessian_matches_gradient_differences() {
    let pr = params(1.5);
    let (mesh, w) = perturbed_interpolant(0.3, 7);
    let disc = Discretization::new(&mesh).unwrap();
    let hess = assemble_hessian(&pr, &mesh, &w).unwrap();
    let x = disc.free_vector(&w);
    let mut r = rng(8);
    for _ in 0..20 {
        let d: Vec<f64> = (0..x.len()).map(|_| rand::Rng::gen_range(&mut r, -1.0..1.0)).collect();
        let eps = 1e-6;
        let at = |t: f64| {
            let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            assemble_gradient(&pr, &mesh, &disc.with_free(&w, &y)).unwrap()
        };
        let (gp, gm) = (at(eps), at(-eps));
        let mut hd = vec![0.0; d.len()];
        hess.mul_vec(&d, &mut hd);
        let err: f64 = gp.iter().zip(&gm).zip(&hd).map(|((a, b), c)| ((a - b) / (2.0 * eps) - c).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = hd.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(rel(err, scale) <= 1e-4, "{:e}", rel(err, scale));
    }
}

#[test]
fn assembled_hessian_is_positive_definite() {
    let pr = params(1.5);
    let (mesh, w) = perturbed_interpolant(0.3, 9);
    let hess = assemble_hessian(&pr, &mesh, &w).unwrap();
    let n = hess.n;
    // inverse power iteration: the dominant eigenvalue of H^{-1} is 1 / lambda_min
    let mut v: Vec<f64> = (0..n).map(|k| 1.0 + (k % 7) as f64 * 0.1).collect();
    let mut lambda_min = f64::NAN;
    for _ in 0..60 {
        let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= nv);
        let (y, out) = pcg(&hess, &v, 1e-12, 10_000);
        assert!(out.converged);
        let vy: f64 = v.iter().zip(&y).map(|(a, b)| a * b).sum();
        lambda_min = 1.0 / vy;
        v = y;
    }
    let mut hv = vec![0.0; n];
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= nv);
    hess.mul_vec(&v, &mut hv);
    let rayleigh: f64 = v.iter().zip(&hv).map(|(a, b)| a * b).sum();
    assert!(lambda_min > 0.0 && rayleigh > 0.0, "{lambda_min} {rayleigh}");
    assert!((rayleigh - lambda_min).abs() <= 1e-6 * lambda_min);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gradient_directional_derivative(
        zf in prop::array::uniform4(-10.0f64..10.0),
        lf in prop::array::uniform4(-1.0f64..1.0),
        theta in 0.0f64..std::f64::consts::TAU,
        p in 1.05f64..1.95,
    ) {
        let pr = params(p);
        let x = Vec2::new(theta.cos(), theta.sin());
        let z = Mat2::from_flat(zf);
        let l = Mat2::from_flat(lf);
        prop_assume!(l.frobenius() > 1e-2);
        let h = 1e-6 * (1.0 + z.frobenius());
        let fd = (pr.integrand_f(&x, &(z + l * h)).unwrap() - pr.integrand_f(&x, &(z - l * h)).unwrap()) / (2.0 * h);
        let exact = pr.grad_f_z(&x, &z).unwrap().dot(&l);
        let scale = pr.grad_f_z(&x, &z).unwrap().frobenius() * l.frobenius();
        prop_assert!((fd - exact).abs() <= 1e-6 * scale.max(1e-6), "{} vs {}", fd, exact);
    }

    #[test]
    fn flux_difference_is_monotone(
        af in prop::array::uniform4(-5.0f64..5.0),
        bf in prop::array::uniform4(-5.0f64..5.0),
        uf in prop::array::uniform2(-3.0f64..3.0),
    ) {
        // strict monotonicity of z -> a(u, z) follows from the ellipticity of D_z a
        let pr = params(1.5);
        let u = Vec2(uf);
        let (a, b) = (Mat2::from_flat(af), Mat2::from_flat(bf));
        prop_assume!((a - b).frobenius() > 1e-6);
        let m = (pr.coeff_a(&u, &a) - pr.coeff_a(&u, &b)).dot(&(a - b));
        prop_assert!(m > 0.0);
    }
}
