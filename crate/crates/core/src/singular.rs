//! Closed forms for `u(x) = x/|x|` on the punctured disk and the checks that
//! it solves the homogeneous systems pointwise.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::integrand::IntegrandParams;
use crate::quadrature::{DiskRule, TestFunction};
use crate::tensor::{outer, Mat2, Scalar, Vec2};

fn nonzero<T: Scalar>(x: &Vec2<T>) -> Result<T> {
    let r = x.norm();
    if !x.is_finite() || r == T::zero() {
        return Err(Error::domain("singular map is undefined at x = 0"));
    }
    Ok(r)
}

/// `u(x) = x / |x|`.
pub fn u_sing<T: Scalar>(x: &Vec2<T>) -> Result<Vec2<T>> {
    let r = nonzero(x)?;
    Ok(*x * r.recip())
}

/// `Du(x) = I/|x| - x (x) x / |x|^3`.
pub fn du_sing<T: Scalar>(x: &Vec2<T>) -> Result<Mat2<T>> {
    let r = nonzero(x)?;
    Ok(Mat2::identity() * r.recip() - outer(x, x) * (r * r * r).recip())
}

/// `A(x/|x|) Du(x) = 2 I/|x| + 2(p-1)/(2-p) x (x) x / |x|^3`.
pub fn a_du_sing<T: Scalar>(params: &IntegrandParams<T>, x: &Vec2<T>) -> Result<Mat2<T>> {
    let r = nonzero(x)?;
    let p = params.p;
    let two = T::lit(2.0);
    let c = two * (p - T::one()) / (two - p);
    Ok(Mat2::identity() * (two / r) + outer(x, x) * (c / (r * r * r)))
}

/// `Phi(x) = |x|^{2-p} A(x/|x|) Du(x)`, the Euler-Lagrange flux along the
/// singular map up to the constant `2^{(p-2)/2} m_g^{p/2}`.
pub fn singular_flux<T: Scalar>(params: &IntegrandParams<T>, x: &Vec2<T>) -> Result<Mat2<T>> {
    let r = nonzero(x)?;
    Ok(a_du_sing(params, x)? * r.powf(T::lit(2.0) - params.p))
}

/// Row divergence `sum_k d_k M[i][k]` by the fourth-order central stencil
/// with step `h` (samples at `x +- h e_k` and `x +- 2h e_k`).
pub fn divergence_fd<F>(field: F, x: &Vec2<f64>, h: f64) -> Result<Vec2<f64>>
where
    F: Fn(&Vec2<f64>) -> Result<Mat2<f64>>,
{
    let mut div = Vec2::zero();
    for k in 0..2 {
        let mut e = Vec2::zero();
        e.0[k] = h;
        let p1 = field(&(*x + e))?;
        let m1 = field(&(*x - e))?;
        let p2 = field(&(*x + e * 2.0))?;
        let m2 = field(&(*x - e * 2.0))?;
        for i in 0..2 {
            div.0[i] += (8.0 * (p1.0[i][k] - m1.0[i][k]) - (p2.0[i][k] - m2.0[i][k])) / (12.0 * h);
        }
    }
    Ok(div)
}

fn check_stencil(x: &Vec2<f64>, h: f64) -> Result<()> {
    let r = nonzero(x)?;
    if !(h > 0.0 && h < r / 4.0) {
        return Err(Error::domain(format!("stencil step {h} must lie in (0, |x|/4) = (0, {})", r / 4.0)));
    }
    Ok(())
}

/// Central-difference divergence of [`singular_flux`]; the exact value is zero.
pub fn strong_divergence_residual(params: &IntegrandParams<f64>, x: &Vec2<f64>, h: f64) -> Result<Vec2<f64>> {
    check_stencil(x, h)?;
    divergence_fd(|y| singular_flux(params, y), x, h)
}

/// Central-difference divergence of `|x|^{-3} x (x) x`, which vanishes in the plane.
pub fn rank_one_divergence_residual(x: &Vec2<f64>, h: f64) -> Result<Vec2<f64>> {
    check_stencil(x, h)?;
    divergence_fd(
        |y| {
            let r = nonzero(y)?;
            Ok(outer(y, y) * (r * r * r).recip())
        },
        x,
        h,
    )
}

/// `int_B |Du|^p dx = 2 pi / (2 - p)`.
pub fn w1p_seminorm_sing(p: f64) -> Result<f64> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::domain(format!("seminorm of x/|x| needs p in (1, 2), got {p}")));
    }
    Ok(2.0 * PI / (2.0 - p))
}

/// Left minus right side of the sphere-valued p-harmonic identity
/// `int |Du|^{p-2} Du . D phi = int |Du|^p u . phi`, by quadrature.
pub fn p_harmonic_residual(p: f64, rule: &DiskRule, phi: &TestFunction) -> Result<PHarmonicResidual> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::domain(format!("p-harmonic check needs p in (1, 2), got {p}")));
    }
    let terms: Vec<(f64, f64)> = rule
        .points()
        .map(|(x, w)| {
            let r = x.norm();
            let du = du_sing(&x).expect("rule nodes avoid the origin");
            let u = x * r.recip();
            let (val, grad) = phi.eval(&x);
            // |Du| = 1/r
            let lhs = r.powf(2.0 - p) * du.dot(&grad);
            let rhs = r.powf(-p) * u.dot(&val);
            (w * lhs, w * rhs)
        })
        .collect();
    let lhs = crate::sum::pairwise(&terms.iter().map(|t| t.0).collect::<Vec<_>>());
    let rhs = crate::sum::pairwise(&terms.iter().map(|t| t.1).collect::<Vec<_>>());
    Ok(PHarmonicResidual { lhs, rhs, residual: lhs - rhs })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PHarmonicResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl PHarmonicResidual {
    /// The acceptance scale `|LHS| + |RHS| + 1`.
    pub fn scale(&self) -> f64 {
        self.lhs.abs() + self.rhs.abs() + 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::make_params;

    #[test]
    fn closed_form_values() {
        assert_eq!(u_sing(&Vec2::new(0.5, 0.0)).unwrap(), Vec2::new(1.0, 0.0));
        let u = u_sing(&Vec2::new(3.0f64, 4.0)).unwrap();
        assert!((u.x() - 0.6).abs() < 1e-15 && (u.y() - 0.8).abs() < 1e-15);
        assert_eq!(du_sing(&Vec2::new(1.0, 0.0)).unwrap(), Mat2::new(0.0, 0.0, 0.0, 1.0));
        let params = make_params(1.5).unwrap();
        let a = a_du_sing(&params, &Vec2::new(1.0, 0.0)).unwrap();
        assert_eq!(a, Mat2::new(4.0, 0.0, 0.0, 2.0));
        assert!(u_sing(&Vec2::<f64>::zero()).is_err());
        assert!(du_sing(&Vec2::<f64>::zero()).is_err());
        assert!(a_du_sing(&params, &Vec2::zero()).is_err());
    }

    #[test]
    fn position_is_in_kernel_of_du() {
        let x = Vec2::new(0.3, -0.7);
        let du = du_sing(&x).unwrap();
        assert!(du.mul_vec(&x).norm() < 1e-15);
        let u = u_sing(&x).unwrap();
        assert!(du.matmul(&outer(&u, &u)).frobenius() < 1e-15);
    }

    #[test]
    fn seminorm() {
        assert!((w1p_seminorm_sing(1.5).unwrap() - 4.0 * PI).abs() < 1e-14);
        assert!(w1p_seminorm_sing(2.0).is_err());
        assert!(w1p_seminorm_sing(1.0).is_err());
        let mut prev = 0.0;
        for p in [1.1, 1.5, 1.9, 1.99, 1.999] {
            let v = w1p_seminorm_sing(p).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn stencil_guard() {
        let params = make_params(1.5).unwrap();
        let x = Vec2::new(0.1, 0.0);
        assert!(strong_divergence_residual(&params, &x, 0.03).is_err());
        assert!(strong_divergence_residual(&params, &x, 0.0).is_err());
        assert!(strong_divergence_residual(&params, &x, 0.01).is_ok());
    }
}
