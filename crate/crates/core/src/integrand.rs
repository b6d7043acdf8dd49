//! The x-discontinuous integrand and the u-dependent coefficients built on
//! the bilinear form
//!
//! ```text
//! A^{kl}_{ij}(u) = d_kl d_ij + B_ik(u) B_jl(u),   B(u) = I + c u (x) u / (1 + |u|^2),
//! c = 2p / (2 - p),
//! ```
//!
//! together with the closed-form first and second derivatives used by the
//! structure auditor and the Newton solver.

use std::fmt::Write as _;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::tensor::{outer, Form4, Mat2, Scalar, Vec2};

/// Number of grid points of the dense scan that estimates the cutoff supremum.
pub const SUP_SCAN_POINTS: usize = 1_000_000;
/// Relative inflation applied to the scanned supremum when forming `m_g`.
pub const M_G_SAFETY: f64 = 1e-3;

/// A symmetric smooth cutoff `g` with `1_{0} <= g <= 1_{(-1,1)}`.
pub trait Cutoff: Copy + Send + Sync {
    fn value<T: Scalar>(&self, s: T) -> T;
    fn d1<T: Scalar>(&self, s: T) -> T;
    fn d2<T: Scalar>(&self, s: T) -> T;
    fn describe(&self) -> &'static str;
}

/// `g(s) = exp(1 - 1/(1 - s^2))` for `|s| < 1`, zero otherwise.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BumpCutoff;

impl BumpCutoff {
    // returns (g, q) with q = 1 - s^2, or None outside the support
    #[inline]
    fn core<T: Scalar>(s: T) -> Option<(T, T)> {
        let q = T::one() - s * s;
        if q <= T::zero() {
            return None;
        }
        let g = (T::one() - q.recip()).exp();
        if g == T::zero() {
            None
        } else {
            Some((g, q))
        }
    }
}

impl Cutoff for BumpCutoff {
    fn value<T: Scalar>(&self, s: T) -> T {
        Self::core(s).map_or(T::zero(), |(g, _)| g)
    }

    fn d1<T: Scalar>(&self, s: T) -> T {
        Self::core(s).map_or(T::zero(), |(g, q)| -g * T::lit(2.0) * s / (q * q))
    }

    fn d2<T: Scalar>(&self, s: T) -> T {
        Self::core(s).map_or(T::zero(), |(g, q)| {
            let q2 = q * q;
            let s2 = s * s;
            g * (T::lit(4.0) * s2 / (q2 * q2) - T::lit(2.0) / q2 - T::lit(8.0) * s2 / (q2 * q))
        })
    }

    fn describe(&self) -> &'static str {
        "g(s) = exp(1 - 1/(1 - s^2)) for |s| < 1, g(s) = 0 otherwise"
    }
}

/// Dense-grid estimate of `sup_s { |g'(s)| + 2 |g''(s)| s }`.
///
/// Outside `[-1, 1]` the expression vanishes identically, so the scan covers
/// the support only and the result is floored at zero.
pub fn cutoff_sup_scan<C: Cutoff>(cutoff: &C, points: usize) -> f64 {
    assert!(points >= 2);
    let step = 2.0 / (points - 1) as f64;
    (0..points)
        .map(|k| {
            let s = -1.0 + step * k as f64;
            cutoff.d1(s).abs() + 2.0 * cutoff.d2(s).abs() * s
        })
        .fold(0.0, f64::max)
}

fn bump_sup() -> f64 {
    static SUP: OnceLock<f64> = OnceLock::new();
    *SUP.get_or_init(|| cutoff_sup_scan(&BumpCutoff, SUP_SCAN_POINTS))
}

/// One instance of the construction: exponent `p`, cutoff and `m_g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrandParams<T> {
    pub p: T,
    pub m_g: T,
    pub cutoff: BumpCutoff,
    /// Scanned value of `sup_s { |g'| + 2 |g''| s }` (before the safety factor).
    pub sup_term: f64,
    /// `2p / (2 - p)`.
    twist: T,
}

/// Structure constants `nu <= L` together with the Hoelder exponents of the
/// continuity moduli (`alpha` for the coefficients, `alpha1`, `alpha2` for
/// the integrand).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureBounds {
    pub nu: f64,
    pub l: f64,
    pub alpha: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl StructureBounds {
    pub fn new(nu: f64, l: f64, alpha: f64, alpha1: f64, alpha2: f64) -> Result<Self> {
        if !(nu > 0.0 && l >= nu && l.is_finite()) {
            return Err(Error::domain(format!("need L >= nu > 0, got nu = {nu}, L = {l}")));
        }
        for a in [alpha, alpha1, alpha2] {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::domain(format!("Hoelder exponent {a} outside (0, 1]")));
            }
        }
        Ok(StructureBounds { nu, l, alpha, alpha1, alpha2 })
    }

    pub fn ratio(&self) -> f64 {
        self.l / self.nu
    }
}

/// `omega_beta(t) = min{1, t^beta}`.
pub fn modulus(beta: f64, t: f64) -> f64 {
    t.powf(beta).min(1.0)
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 && p < 2.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("exponent p = {p} must lie in (1, 2)")))
    }
}

/// Builds the parameters for `p in (1, 2)` with the bump cutoff and
/// `m_g = (p-1)^{-1} (1 + S*) (1 + 1e-3)`.
pub fn make_params<T: Scalar>(p: T) -> Result<IntegrandParams<T>> {
    let pf = p.as_f64();
    check_p(pf)?;
    let sup = bump_sup();
    let m_g = (1.0 + sup) / (pf - 1.0) * (1.0 + M_G_SAFETY);
    Ok(IntegrandParams::assemble(p, T::lit(m_g), sup))
}

/// Structured-text record of the cutoff and the `m_g` values for `ps`.
pub fn params_fixture(ps: &[f64]) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "# cutoff and m_g per exponent").unwrap();
    writeln!(out, "cutoff = \"{}\"", BumpCutoff.describe()).unwrap();
    writeln!(out, "scan_points = {SUP_SCAN_POINTS}").unwrap();
    writeln!(out, "sup_term = {:.16e}", bump_sup()).unwrap();
    writeln!(out, "safety = {M_G_SAFETY:e}").unwrap();
    for &p in ps {
        let params = make_params(p)?;
        writeln!(out, "\n[[params]]\np = {p:.16e}\nm_g = {:.16e}", params.m_g).unwrap();
    }
    Ok(out)
}

#[inline]
fn unit<T: Scalar>(x: &Vec2<T>) -> Result<Vec2<T>> {
    if !x.is_finite() {
        return Err(Error::domain("evaluation point is not finite"));
    }
    let r = x.norm();
    if r == T::zero() {
        return Err(Error::domain("integrand is undefined at x = 0"));
    }
    Ok(*x * r.recip())
}

impl<T: Scalar> IntegrandParams<T> {
    fn assemble(p: T, m_g: T, sup_term: f64) -> Self {
        let two = T::lit(2.0);
        IntegrandParams { p, m_g, cutoff: BumpCutoff, sup_term, twist: two * p / (two - p) }
    }

    /// Parameters with a caller-chosen `m_g`, which must respect the lower
    /// bound `(p-1)^{-1} (1 + S*)` and exceed one.
    pub fn with_m_g(p: T, m_g: T) -> Result<Self> {
        let pf = p.as_f64();
        check_p(pf)?;
        let sup = bump_sup();
        let lower = (1.0 + sup) / (pf - 1.0);
        let mf = m_g.as_f64();
        if !(mf > 1.0 && mf >= lower) {
            return Err(Error::domain(format!("m_g = {mf} below the admissible bound {lower}")));
        }
        Ok(Self::assemble(p, m_g, sup))
    }

    /// The factor `2p / (2 - p)` in front of the rank-one part of `B(u)`.
    #[inline]
    pub fn twist(&self) -> T {
        self.twist
    }

    /// `B(u) = I + c u (x) u / (1 + |u|^2)`, so that `T_u(z) = B(u) . z`.
    #[inline]
    pub fn b_matrix(&self, u: &Vec2<T>) -> Mat2<T> {
        Mat2::identity() + outer(u, u) * (self.twist / (T::one() + u.norm_sq()))
    }

    /// `T_u(z) = tr z + c (z . u (x) u) / (1 + |u|^2)`.
    pub fn t_u(&self, u: &Vec2<T>, z: &Mat2<T>) -> T {
        z.trace() + self.twist * z.dot(&outer(u, u)) / (T::one() + u.norm_sq())
    }

    /// The rank-4 coefficients of `A(u)`, built entry by entry.
    pub fn bilinear_a(&self, u: &Vec2<T>) -> Form4<T> {
        let b = self.b_matrix(u);
        Form4::from_fn(|k, l, i, j| {
            let diag = if k == l && i == j { T::one() } else { T::zero() };
            diag + b.0[i][k] * b.0[j][l]
        })
    }

    /// `A(u) z = z + T_u(z) B(u)`.
    #[inline]
    pub fn a_apply(&self, u: &Vec2<T>, z: &Mat2<T>) -> Mat2<T> {
        let b = self.b_matrix(u);
        *z + b * b.dot(z)
    }

    /// `A(u)(z, zb) = z . zb + T_u(z) T_u(zb)`.
    #[inline]
    pub fn a_pair(&self, u: &Vec2<T>, z: &Mat2<T>, zb: &Mat2<T>) -> T {
        let b = self.b_matrix(u);
        z.dot(zb) + b.dot(z) * b.dot(zb)
    }

    // g(|z|^2) + m_g A(u)(z,z) and the pieces its derivatives reuse
    #[inline]
    fn inner(&self, u: &Vec2<T>, z: &Mat2<T>) -> Inner<T> {
        let b = self.b_matrix(u);
        let s = z.frobenius_sq();
        let tz = b.dot(z);
        let az = *z + b * tz;
        let g = self.cutoff.value(s);
        let g1 = self.cutoff.d1(s);
        let g2 = self.cutoff.d2(s);
        let big_s = g + self.m_g * (s + tz * tz);
        Inner { b, az, g1, g2, big_s }
    }

    /// `f(x, z) = (g(|z|^2) + m_g A(x/|x|)(z, z))^{p/2}`; refuses `x = 0`.
    pub fn integrand_f(&self, x: &Vec2<T>, z: &Mat2<T>) -> Result<T> {
        let u = unit(x)?;
        let inner = self.inner(&u, z);
        Ok(inner.big_s.powf(self.p / T::lit(2.0)))
    }

    /// `D_z f(x, z) = p S^{(p-2)/2} (g'(|z|^2) z + m_g A(x/|x|) z)`.
    pub fn grad_f_z(&self, x: &Vec2<T>, z: &Mat2<T>) -> Result<Mat2<T>> {
        let u = unit(x)?;
        let inner = self.inner(&u, z);
        let e = (self.p - T::lit(2.0)) / T::lit(2.0);
        Ok((*z * inner.g1 + inner.az * self.m_g) * (self.p * inner.big_s.powf(e)))
    }

    /// Euler-Lagrange flux `D_z f / p` (constant factor dropped).
    pub fn flux(&self, x: &Vec2<T>, z: &Mat2<T>) -> Result<Mat2<T>> {
        Ok(self.grad_f_z(x, z)? * self.p.recip())
    }

    /// `D_zz f(x, z)(lambda, lambda)` in the three-term closed form.
    pub fn hess_f_zz(&self, x: &Vec2<T>, z: &Mat2<T>, lambda: &Mat2<T>) -> Result<T> {
        let u = unit(x)?;
        let inner = self.inner(&u, z);
        let zl = z.dot(lambda);
        let bl = inner.b.dot(lambda);
        let a_ll = lambda.frobenius_sq() + bl * bl;
        let a_zl = inner.az.dot(lambda);
        let two = T::lit(2.0);
        let second = inner.g1 * lambda.frobenius_sq() + two * inner.g2 * zl * zl + self.m_g * a_ll;
        let mixed = inner.g1 * zl + self.m_g * a_zl;
        let bracket = inner.big_s * second - (two - self.p) * mixed * mixed;
        Ok(self.p * inner.big_s.powf((self.p - T::lit(4.0)) / two) * bracket)
    }

    /// Full Hessian `H` in flat indices, `D_zz f (lambda, mu) = flat(lambda)^T H flat(mu)`.
    pub fn hess_f_zz_matrix(&self, x: &Vec2<T>, z: &Mat2<T>) -> Result<[[T; 4]; 4]> {
        let u = unit(x)?;
        let inner = self.inner(&u, z);
        let two = T::lit(2.0);
        let zf = z.to_flat();
        let bf = inner.b.to_flat();
        let gvec = (*z * inner.g1 + inner.az * self.m_g).to_flat();
        let pre = self.p * inner.big_s.powf((self.p - T::lit(4.0)) / two);
        let mut h = [[T::zero(); 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                let delta = if a == b { T::one() } else { T::zero() };
                let second = inner.g1 * delta
                    + two * inner.g2 * zf[a] * zf[b]
                    + self.m_g * (delta + bf[a] * bf[b]);
                h[a][b] = pre * (inner.big_s * second - (two - self.p) * gvec[a] * gvec[b]);
            }
        }
        Ok(h)
    }

    /// `a(u, z) = (g(|z|^2) + m_g A(u)(z, z))^{(p-2)/2} A(u) z`, defined for every `u`.
    pub fn coeff_a(&self, u: &Vec2<T>, z: &Mat2<T>) -> Mat2<T> {
        let inner = self.inner(u, z);
        inner.az * inner.big_s.powf((self.p - T::lit(2.0)) / T::lit(2.0))
    }

    /// `D_z a(u, z)` as a form: `apply(lambda)` is the directional derivative.
    /// Not symmetric in general (the `g'` term enters one slot only).
    pub fn d_z_coeff_a(&self, u: &Vec2<T>, z: &Mat2<T>) -> Form4<T> {
        let inner = self.inner(u, z);
        let two = T::lit(2.0);
        let e = (self.p - two) / two;
        let se = inner.big_s.powf(e);
        let azf = inner.az.to_flat();
        let gvec = (*z * inner.g1 + inner.az * self.m_g).to_flat();
        let bf = inner.b.to_flat();
        let rank_one = two * e * se / inner.big_s;
        let mut m = [[T::zero(); 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                let delta = if r == c { T::one() } else { T::zero() };
                m[r][c] = se * (delta + bf[r] * bf[c]) + rank_one * azf[r] * gvec[c];
            }
        }
        Form4::from_matrix(&m)
    }

    /// `[d a / d u_1, d a / d u_2]`.
    pub fn d_u_coeff_a(&self, u: &Vec2<T>, z: &Mat2<T>) -> [Mat2<T>; 2] {
        let inner = self.inner(u, z);
        let two = T::lit(2.0);
        let e = (self.p - two) / two;
        let se = inner.big_s.powf(e);
        let w = T::one() + u.norm_sq();
        let tz = inner.b.dot(z);
        let uu = outer(u, u);
        let mut out = [Mat2::zero(); 2];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut ek = Vec2::zero();
            ek.0[k] = T::one();
            let db = ((outer(&ek, u) + outer(u, &ek)) * w - uu * (two * u.0[k])) * (self.twist / (w * w));
            let tk = db.dot(z);
            let ds = two * self.m_g * tz * tk;
            let d_az = inner.b * tk + db * tz;
            *slot = inner.az * (e * se / inner.big_s * ds) + d_az * se;
        }
        out
    }
}

struct Inner<T> {
    b: Mat2<T>,
    az: Mat2<T>,
    g1: T,
    g2: T,
    big_s: T,
}
