//! Graded polar quadrature on the unit disk, smooth test functions with zero
//! boundary values, and the weak-form residuals of the homogeneous systems
//! along `u(x) = x/|x|`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrand::{BumpCutoff, Cutoff, IntegrandParams};
use crate::singular::{du_sing, u_sing};
use crate::sum::pairwise;
use crate::tensor::{Mat2, Vec2};

/// Default number of Gauss-Legendre points per radial cell.
pub const DEFAULT_GAUSS_ORDER: usize = 5;

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Tensor rule in `(r, theta)` on the unit disk with radial cells
/// `[(k/n_r)^gamma, ((k+1)/n_r)^gamma]` refined by Gauss points and
/// equispaced (midpoint) angles. All nodes lie in the open disk minus the
/// origin; weights include the polar Jacobian and sum to `pi`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskRule {
    pub nodes: Vec<Vec2<f64>>,
    pub weights: Vec<f64>,
    pub gamma: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub order: usize,
}

pub fn build_rule(n_r: usize, n_theta: usize, gamma: f64) -> Result<DiskRule> {
    build_rule_with_order(n_r, n_theta, gamma, DEFAULT_GAUSS_ORDER)
}

pub fn build_rule_with_order(n_r: usize, n_theta: usize, gamma: f64, order: usize) -> Result<DiskRule> {
    if n_r < 2 || n_theta < 2 {
        return Err(Error::usage(format!("rule needs n_r, n_theta >= 2, got ({n_r}, {n_theta})")));
    }
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(Error::usage(format!("grading exponent must be >= 1, got {gamma}")));
    }
    if order == 0 {
        return Err(Error::usage("Gauss order must be positive"));
    }
    let (gx, gw) = gauss_legendre(order);
    let dtheta = 2.0 * PI / n_theta as f64;
    let angles: Vec<(f64, f64)> = (0..n_theta)
        .map(|j| {
            let t = dtheta * (j as f64 + 0.5);
            (t.cos(), t.sin())
        })
        .collect();
    let mut nodes = Vec::with_capacity(n_r * order * n_theta);
    let mut weights = Vec::with_capacity(n_r * order * n_theta);
    for k in 0..n_r {
        let lo = (k as f64 / n_r as f64).powf(gamma);
        let hi = ((k + 1) as f64 / n_r as f64).powf(gamma);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (x, w) in gx.iter().zip(&gw) {
            let r = mid + half * x;
            let wr = w * half * r * dtheta;
            for &(c, s) in &angles {
                nodes.push(Vec2::new(r * c, r * s));
                weights.push(wr);
            }
        }
    }
    Ok(DiskRule { nodes, weights, gamma, n_r, n_theta, order })
}

impl DiskRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (Vec2<f64>, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn total_weight(&self) -> f64 {
        pairwise(&self.weights)
    }

    /// The same rule transplanted to the ball `B_radius(center)`.
    pub fn mapped(&self, center: &Vec2<f64>, radius: f64) -> DiskRule {
        let scale = radius * radius;
        DiskRule {
            nodes: self.nodes.iter().map(|x| *center + *x * radius).collect(),
            weights: self.weights.iter().map(|w| w * scale).collect(),
            ..self.clone()
        }
    }

    /// Integral of a scalar function; parallel map, fixed-order reduction.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&Vec2<f64>) -> f64 + Sync,
    {
        let terms: Vec<f64> = self
            .nodes
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(x, w)| w * f(x))
            .collect();
        pairwise(&terms)
    }

    /// Fallible variant of [`DiskRule::integrate`]; stops at the first error
    /// in node order.
    pub fn try_integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&Vec2<f64>) -> Result<f64> + Sync,
    {
        let terms: Vec<Result<f64>> = self
            .nodes
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(x, w)| f(x).map(|v| w * v))
            .collect();
        let terms: Vec<f64> = terms.into_iter().collect::<Result<_>>()?;
        Ok(pairwise(&terms))
    }

    /// Relative error on the integrable worst case `|x|^{1-p}`, whose exact
    /// integral is `2 pi / (3 - p)`. Serves as the rule's tolerance scale.
    pub fn calibration_error(&self, p: f64) -> f64 {
        let exact = 2.0 * PI / (3.0 - p);
        let approx = self.integrate(|x| x.norm().powf(1.0 - p));
        (approx - exact).abs() / exact
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,weight\n");
        for (x, w) in self.points() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", x.x(), x.y(), w).unwrap();
        }
        out
    }

    /// Parses a CSV dump. Metadata other than the nodes is not stored in the
    /// file, so the grading fields are set to zero.
    pub fn from_csv(text: &str) -> Result<DiskRule> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "x,y,weight" => {}
            _ => return Err(Error::Parse("rule CSV must start with header x,y,weight".into())),
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (n, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("rule CSV line {}: {e}", n + 2)))?;
            if vals.len() != 3 {
                return Err(Error::Parse(format!("rule CSV line {}: expected 3 fields", n + 2)));
            }
            nodes.push(Vec2::new(vals[0], vals[1]));
            weights.push(vals[2]);
        }
        Ok(DiskRule { nodes, weights, gamma: 0.0, n_r: 0, n_theta: 0, order: 0 })
    }
}

/// Radial profile built from the bump `b(t) = exp(1 - 1/(1 - t^2))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    /// `b(r / outer)`, smooth across the origin.
    Disk { outer: f64 },
    /// `b((2r - inner - outer) / (outer - inner))`, supported in an annulus.
    Annulus { inner: f64, outer: f64 },
}

impl Profile {
    pub fn covers_origin(&self) -> bool {
        matches!(self, Profile::Disk { .. })
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Profile::Disk { outer } => outer > 0.0 && outer <= 1.0,
            Profile::Annulus { inner, outer } => inner > 0.0 && inner < outer && outer <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::usage(format!("profile {self:?} must sit inside the unit disk")))
        }
    }

    fn support(&self) -> (f64, f64) {
        match *self {
            Profile::Disk { outer } => (0.0, outer),
            Profile::Annulus { inner, outer } => (inner, outer),
        }
    }

    /// `(psi, grad psi)` at `x`.
    fn eval(&self, x: &Vec2<f64>) -> (f64, Vec2<f64>) {
        let g = BumpCutoff;
        match *self {
            Profile::Disk { outer } => {
                let t2 = x.norm_sq() / (outer * outer);
                if t2 >= 1.0 {
                    return (0.0, Vec2::zero());
                }
                let val = g.value(t2.sqrt());
                let q = 1.0 - t2;
                // d/dx b(|x|/R) = -2 b / (R^2 q^2) x
                (val, *x * (-2.0 * val / (outer * outer * q * q)))
            }
            Profile::Annulus { inner, outer } => {
                let r = x.norm();
                if r <= inner || r >= outer {
                    return (0.0, Vec2::zero());
                }
                let scale = 2.0 / (outer - inner);
                let t = (2.0 * r - inner - outer) / (outer - inner);
                (g.value(t), *x * (g.d1(t) * scale / r))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TestKind {
    /// `psi(r) e_c`.
    RadialBump(Profile),
    /// `psi(r) Re((x1 + i x2)^m) e_c` (or `Im` when `sine`), smooth at the origin.
    AngularMode { profile: Profile, mode: u32, sine: bool },
    /// Piecewise-linear hat: one at `apex`, zero on the polygon `ring`
    /// (star-shaped with respect to `apex`), zero outside.
    PiecewiseHat { apex: Vec2<f64>, ring: Vec<Vec2<f64>> },
}

/// Vector-valued test function `phi = psi e_c` vanishing on the unit circle.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub kind: TestKind,
    pub component: usize,
}

impl TestFunction {
    pub fn radial_bump(profile: Profile, component: usize) -> Result<Self> {
        profile.validate()?;
        Self::checked(TestKind::RadialBump(profile), component)
    }

    pub fn angular_mode(profile: Profile, mode: u32, sine: bool, component: usize) -> Result<Self> {
        profile.validate()?;
        Self::checked(TestKind::AngularMode { profile, mode, sine }, component)
    }

    pub fn piecewise_hat(apex: Vec2<f64>, ring: Vec<Vec2<f64>>, component: usize) -> Result<Self> {
        if ring.len() < 3 {
            return Err(Error::usage("hat needs a ring of at least three vertices"));
        }
        if ring.iter().chain(std::iter::once(&apex)).any(|v| v.norm() > 1.0 + 1e-12) {
            return Err(Error::usage("hat support must lie in the closed unit disk"));
        }
        Self::checked(TestKind::PiecewiseHat { apex, ring }, component)
    }

    fn checked(kind: TestKind, component: usize) -> Result<Self> {
        if component > 1 {
            return Err(Error::usage(format!("component index {component} must be 0 or 1")));
        }
        Ok(TestFunction { kind, component })
    }

    /// Whether the support contains a neighbourhood of the origin.
    pub fn covers_origin(&self) -> bool {
        match &self.kind {
            TestKind::RadialBump(p) | TestKind::AngularMode { profile: p, .. } => p.covers_origin(),
            TestKind::PiecewiseHat { apex, ring } => hat_locate(apex, ring, &Vec2::zero()).is_some(),
        }
    }

    /// Short name, free of commas so it can sit in a CSV cell.
    pub fn label(&self) -> String {
        let c = self.component;
        match &self.kind {
            TestKind::RadialBump(p) => format!("radial{}[c{c}]", profile_label(p)),
            TestKind::AngularMode { profile, mode, sine } => {
                format!("{}{mode}{}[c{c}]", if *sine { "sin" } else { "cos" }, profile_label(profile))
            }
            TestKind::PiecewiseHat { apex, .. } => format!("hat({:.4};{:.4})[c{c}]", apex.x(), apex.y()),
        }
    }

    /// Scalar factor `psi` and its gradient.
    fn scalar(&self, x: &Vec2<f64>) -> (f64, Vec2<f64>) {
        match &self.kind {
            TestKind::RadialBump(p) => p.eval(x),
            TestKind::AngularMode { profile, mode, sine } => {
                let (psi, dpsi) = profile.eval(x);
                if psi == 0.0 && dpsi.norm_sq() == 0.0 {
                    return (0.0, Vec2::zero());
                }
                let (re, im) = complex_pow(x.x(), x.y(), *mode);
                let (re1, im1) = if *mode == 0 { (0.0, 0.0) } else { complex_pow(x.x(), x.y(), mode - 1) };
                let m = *mode as f64;
                // d/dx1 z^m = m z^{m-1}, d/dx2 z^m = i m z^{m-1}
                let (h, dh) = if *sine {
                    (im, Vec2::new(m * im1, m * re1))
                } else {
                    (re, Vec2::new(m * re1, -m * im1))
                };
                (psi * h, dpsi * h + dh * psi)
            }
            TestKind::PiecewiseHat { apex, ring } => match hat_locate(apex, ring, x) {
                Some((val, grad)) => (val, grad),
                None => (0.0, Vec2::zero()),
            },
        }
    }

    /// `(phi(x), D phi(x))` with `D phi[i][k] = d_k phi_i`.
    pub fn eval(&self, x: &Vec2<f64>) -> (Vec2<f64>, Mat2<f64>) {
        let (s, ds) = self.scalar(x);
        let mut val = Vec2::zero();
        val.0[self.component] = s;
        let mut grad = Mat2::zero();
        grad.0[self.component] = ds.0;
        (val, grad)
    }

    /// Estimate of `sup |D phi|` (Frobenius) on a dense polar net of the support.
    pub fn grad_sup(&self) -> f64 {
        let (lo, hi) = match &self.kind {
            TestKind::RadialBump(p) | TestKind::AngularMode { profile: p, .. } => p.support(),
            TestKind::PiecewiseHat { apex, ring } => {
                // gradient is piecewise constant: take the max over the triangles
                return (0..ring.len())
                    .filter_map(|k| tri_grad(apex, &ring[k], &ring[(k + 1) % ring.len()]))
                    .map(|g| g.norm())
                    .fold(0.0, f64::max);
            }
        };
        let (n_r, n_t) = (2000, 96);
        let mut best: f64 = 0.0;
        for a in 0..=n_r {
            let r = lo + (hi - lo) * a as f64 / n_r as f64;
            for b in 0..n_t {
                let t = 2.0 * PI * b as f64 / n_t as f64;
                let (_, g) = self.scalar(&Vec2::new(r * t.cos(), r * t.sin()));
                best = best.max(g.norm());
            }
        }
        best
    }
}

fn profile_label(p: &Profile) -> String {
    match *p {
        Profile::Disk { outer } => format!("(0..{outer:.3})"),
        Profile::Annulus { inner, outer } => format!("({inner:.3}..{outer:.3})"),
    }
}

fn complex_pow(x: f64, y: f64, m: u32) -> (f64, f64) {
    let (mut re, mut im) = (1.0, 0.0);
    for _ in 0..m {
        let nr = re * x - im * y;
        im = re * y + im * x;
        re = nr;
    }
    (re, im)
}

// gradient of the barycentric coordinate of `a` in triangle (a, b, c)
fn tri_grad(a: &Vec2<f64>, b: &Vec2<f64>, c: &Vec2<f64>) -> Option<Vec2<f64>> {
    let det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    if det.abs() < 1e-300 {
        return None;
    }
    Some(Vec2::new(b.y() - c.y(), c.x() - b.x()) * det.recip())
}

fn hat_locate(apex: &Vec2<f64>, ring: &[Vec2<f64>], x: &Vec2<f64>) -> Option<(f64, Vec2<f64>)> {
    for k in 0..ring.len() {
        let (b, c) = (&ring[k], &ring[(k + 1) % ring.len()]);
        let det = (b.x() - apex.x()) * (c.y() - apex.y()) - (c.x() - apex.x()) * (b.y() - apex.y());
        if det.abs() < 1e-300 {
            continue;
        }
        let d = *x - *apex;
        let l1 = (d.x() * (c.y() - apex.y()) - (c.x() - apex.x()) * d.y()) / det;
        let l2 = ((b.x() - apex.x()) * d.y() - d.x() * (b.y() - apex.y())) / det;
        let l0 = 1.0 - l1 - l2;
        if l0 >= 0.0 && l1 >= 0.0 && l2 >= 0.0 {
            return tri_grad(apex, b, c).map(|g| (l0, g));
        }
    }
    None
}

/// The default family: 12 radial profiles covering the origin and 12 in
/// annuli avoiding it, each with angular modes 0, 1, 2, for both vector
/// components (144 functions).
pub fn default_family(include_origin: bool) -> Vec<TestFunction> {
    let mut profiles = Vec::new();
    if include_origin {
        for k in 0..12 {
            profiles.push(Profile::Disk { outer: 0.3 + 0.05 * k as f64 + 0.05 });
        }
    }
    for k in 0..12 {
        let inner = 0.05 + 0.05 * k as f64;
        profiles.push(Profile::Annulus { inner, outer: (inner + 0.3).min(0.95) });
    }
    let mut out = Vec::new();
    for profile in profiles {
        for mode in 0..3u32 {
            for component in 0..2 {
                let phi = if mode == 0 {
                    TestFunction::radial_bump(profile, component)
                } else {
                    TestFunction::angular_mode(profile, mode, false, component)
                };
                out.push(phi.expect("default profiles are valid"));
            }
        }
    }
    out
}

/// Which flux is tested against `D phi` along the singular map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FluxKind {
    /// `a(u, Du)` with `u = x/|x|`.
    Coefficients,
    /// `D_z f(x, Du)`.
    EulerLagrange,
}

impl FluxKind {
    pub fn name(&self) -> &'static str {
        match self {
            FluxKind::Coefficients => "coefficients",
            FluxKind::EulerLagrange => "euler_lagrange",
        }
    }
}

/// Flux of the singular map tabulated on the nodes of a rule, so that many
/// test functions can be integrated against it.
pub struct WeakForm<'a> {
    rule: &'a DiskRule,
    flux: Vec<Mat2<f64>>,
    pub kind: FluxKind,
}

impl<'a> WeakForm<'a> {
    pub fn new(params: &IntegrandParams<f64>, rule: &'a DiskRule, kind: FluxKind) -> Result<Self> {
        let flux: Vec<Result<Mat2<f64>>> = rule
            .nodes
            .par_iter()
            .map(|x| {
                let du = du_sing(x)?;
                match kind {
                    FluxKind::Coefficients => Ok(params.coeff_a(&u_sing(x)?, &du)),
                    FluxKind::EulerLagrange => params.grad_f_z(x, &du),
                }
            })
            .collect();
        let flux = flux.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(WeakForm { rule, flux, kind })
    }

    /// `int_B flux : D phi dx`.
    pub fn residual(&self, phi: &TestFunction) -> f64 {
        let terms: Vec<f64> = self
            .rule
            .nodes
            .par_iter()
            .zip(self.rule.weights.par_iter())
            .zip(self.flux.par_iter())
            .map(|((x, w), a)| {
                let (_, grad) = phi.eval(x);
                w * a.dot(&grad)
            })
            .collect();
        pairwise(&terms)
    }
}

/// `int_B a(u, Du) : D phi` for the singular map.
pub fn weak_residual(params: &IntegrandParams<f64>, rule: &DiskRule, phi: &TestFunction) -> Result<f64> {
    Ok(WeakForm::new(params, rule, FluxKind::Coefficients)?.residual(phi))
}

/// `int_B D_z f(x, Du) : D phi` for the singular map.
pub fn weak_residual_el(params: &IntegrandParams<f64>, rule: &DiskRule, phi: &TestFunction) -> Result<f64> {
    Ok(WeakForm::new(params, rule, FluxKind::EulerLagrange)?.residual(phi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n = {n}, deg = {deg}");
            }
        }
    }

    #[test]
    fn rule_basic_invariants() {
        let rule = build_rule(20, 16, 2.0).unwrap();
        assert!((rule.total_weight() - PI).abs() < 1e-12 * PI);
        assert!(rule.weights.iter().all(|&w| w > 0.0));
        assert!(rule.nodes.iter().all(|x| x.norm() > 0.0 && x.norm() < 1.0));
        assert!(rule.integrate(|x| x.x()).abs() < 1e-12);
    }

    #[test]
    fn rule_rejects_bad_input() {
        assert!(matches!(build_rule(1, 16, 2.0), Err(Error::Usage(_))));
        assert!(matches!(build_rule(4, 1, 2.0), Err(Error::Usage(_))));
        assert!(matches!(build_rule(4, 4, 0.5), Err(Error::Usage(_))));
    }

    #[test]
    fn csv_round_trip() {
        let rule = build_rule(3, 4, 1.5).unwrap();
        let back = DiskRule::from_csv(&rule.to_csv()).unwrap();
        assert_eq!(back.nodes, rule.nodes);
        assert_eq!(back.weights, rule.weights);
        assert!(DiskRule::from_csv("a,b\n").is_err());
        assert!(DiskRule::from_csv("x,y,weight\n1,2\n").is_err());
    }

    #[test]
    fn test_functions_vanish_on_boundary() {
        for phi in default_family(true) {
            for k in 0..32 {
                let t = 2.0 * PI * k as f64 / 32.0;
                let (v, g) = phi.eval(&Vec2::new(t.cos(), t.sin()));
                assert_eq!(v, Vec2::zero(), "{}", phi.label());
                assert_eq!(g, Mat2::zero());
            }
        }
    }

    #[test]
    fn default_family_shape() {
        let fam = default_family(true);
        assert_eq!(fam.len(), 144);
        assert_eq!(fam.iter().filter(|p| p.covers_origin()).count(), 72);
        assert_eq!(default_family(false).len(), 72);
    }

    #[test]
    fn test_function_gradients_match_differences() {
        let h = 1e-6;
        let hat = TestFunction::piecewise_hat(
            Vec2::new(0.1, 0.0),
            (0..6).map(|k| {
                let t = PI / 3.0 * k as f64;
                Vec2::new(0.1 + 0.2 * t.cos(), 0.2 * t.sin())
            })
            .collect(),
            1,
        )
        .unwrap();
        let mut fam = default_family(true);
        fam.push(TestFunction::angular_mode(Profile::Disk { outer: 0.8 }, 3, true, 0).unwrap());
        fam.push(hat);
        let points = [Vec2::new(0.13, 0.07), Vec2::new(-0.31, 0.42), Vec2::new(0.05, -0.6), Vec2::new(0.02, 0.01)];
        for phi in &fam {
            for x in &points {
                let (_, g) = phi.eval(x);
                for k in 0..2 {
                    let mut e = Vec2::zero();
                    e.0[k] = h;
                    let fd = (phi.eval(&(*x + e)).0 - phi.eval(&(*x - e)).0) * (0.5 / h);
                    for i in 0..2 {
                        let diff = (fd.0[i] - g.0[i][k]).abs();
                        assert!(diff < 1e-6 * (1.0 + g.0[i][k].abs()), "{} at {x:?}", phi.label());
                    }
                }
            }
        }
    }

    #[test]
    fn zero_component_is_rejected() {
        assert!(TestFunction::radial_bump(Profile::Disk { outer: 0.5 }, 2).is_err());
        assert!(TestFunction::radial_bump(Profile::Annulus { inner: 0.6, outer: 0.5 }, 0).is_err());
        assert!(TestFunction::radial_bump(Profile::Disk { outer: 1.5 }, 0).is_err());
    }

    #[test]
    fn labels_fit_in_a_csv_cell() {
        for phi in default_family(true) {
            assert!(!phi.label().contains(','), "{}", phi.label());
        }
        let hat = TestFunction::piecewise_hat(
            Vec2::new(0.1, 0.2),
            vec![Vec2::new(0.3, 0.2), Vec2::new(0.1, 0.4), Vec2::new(-0.1, 0.2), Vec2::new(0.1, 0.0)],
            0,
        )
        .unwrap();
        assert!(!hat.label().contains(','));
    }
}
