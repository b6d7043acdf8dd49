//! Sampling audit of the growth, ellipticity and continuity conditions for the
//! integrand `f(x, z)` and the coefficients `a(u, z)`.
//!
//! Every inequality is either a lower bound `nu * w(z) <= q` or an upper bound
//! `q <= L * w(z)`. The audit evaluates the quotient `q / w(z)` at every
//! sample and reports its extremes: the empirical `nu` is the smallest lower
//! quotient, the empirical `L` the largest upper quotient. An inequality
//! passes when its constant is strictly positive and finite. Derivative
//! consistency (the `C^1` / `C^2` conditions) is checked against central
//! differences.
//!
//! Results never depend on the rayon schedule: samples are evaluated in
//! parallel, then reduced in index order.

use std::fmt::Write as _;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrand::{make_params, IntegrandParams};
use crate::tensor::{Mat2, Vec2};

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_SEED: u64 = 0x5EED_2D1F;
pub const U_MAX: f64 = 3.0;
pub const Z_MAX: f64 = 50.0;
pub const FIXED_DIRECTIONS: usize = 32;
pub const RANDOM_DIRECTIONS: usize = 32;
/// Relative tolerance of the finite-difference derivative checks.
pub const FD_TOL: f64 = 1e-4;
/// Tolerance of the Hessian polarization check.
pub const SYMMETRY_TOL: f64 = 1e-10;
const SYMMETRY_SAMPLES: usize = 1_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    /// Unit vector standing in for `x / |x|`.
    pub x: Vec2<f64>,
    pub u: Vec2<f64>,
    /// Second point for the continuity-in-`u` check.
    pub u_bar: Vec2<f64>,
    pub z: Mat2<f64>,
    /// Seed of this sample's random ellipticity directions.
    pub dir_seed: u64,
}

/// Deterministic cloud of `(x, u, z)` samples with the corner cases
/// `z = 0`, `|z| = 1` and `|z| = Z_max` always present.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleCloud {
    pub seed: u64,
    pub u_max: f64,
    pub z_max: f64,
    pub samples: Vec<Sample>,
}

fn random_unit_matrix(rng: &mut ChaCha8Rng) -> Mat2<f64> {
    loop {
        let m: Mat2<f64> = Mat2::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = m.frobenius();
        if n > 1e-3 && n <= 1.0 {
            return m * n.recip();
        }
    }
}

fn random_in_disk(rng: &mut ChaCha8Rng, radius: f64) -> Vec2<f64> {
    let r = radius * rng.gen::<f64>().sqrt();
    let t = rng.gen_range(0.0..std::f64::consts::TAU);
    Vec2::new(r * t.cos(), r * t.sin())
}

impl SampleCloud {
    pub fn new(count: usize, seed: u64) -> Result<Self> {
        Self::with_ranges(count, seed, U_MAX, Z_MAX)
    }

    pub fn default_cloud() -> Self {
        Self::new(DEFAULT_SAMPLES, DEFAULT_SEED).expect("default cloud parameters are valid")
    }

    pub fn with_ranges(count: usize, seed: u64, u_max: f64, z_max: f64) -> Result<Self> {
        if !(u_max > 0.0 && z_max >= 1.0 && u_max.is_finite() && z_max.is_finite()) {
            return Err(Error::usage(format!("invalid cloud ranges |u| <= {u_max}, |z| <= {z_max}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fixed = fixed_directions();
        let mut samples = Vec::with_capacity(count);
        let corner_dirs = [fixed[0], fixed[3], fixed[4], fixed[10]];
        let mut corners = vec![Mat2::zero()];
        for d in corner_dirs {
            corners.push(d);
            corners.push(d * z_max);
        }
        for k in 0..count {
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let x = Vec2::new(theta.cos(), theta.sin());
            let u = random_in_disk(&mut rng, u_max);
            // half the offsets are small (local Lipschitz), half up to the full range
            let scale = if rng.gen_bool(0.5) { 10f64.powf(rng.gen_range(-4.0..0.0)) } else { 2.0 * u_max };
            let u_bar = u + random_in_disk(&mut rng, scale);
            let z = if k < corners.len() {
                corners[k]
            } else {
                let dir = random_unit_matrix(&mut rng);
                let norm = match rng.gen_range(0..3) {
                    0 => 2.0 * rng.gen::<f64>(),
                    1 => 10f64.powf(rng.gen_range(-3.0..z_max.log10())),
                    _ => z_max * rng.gen::<f64>(),
                };
                dir * norm
            };
            let dir_seed = rng.gen();
            samples.push(Sample { x, u, u_bar, z, dir_seed });
        }
        Ok(SampleCloud { seed, u_max, z_max, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// The fixed part of the ellipticity directions: the four unit matrices, the
/// twelve normalized sums and differences of pairs, and sixteen scattered
/// directions from a fixed seed.
pub fn fixed_directions() -> &'static [Mat2<f64>; FIXED_DIRECTIONS] {
    static DIRS: OnceLock<[Mat2<f64>; FIXED_DIRECTIONS]> = OnceLock::new();
    DIRS.get_or_init(|| {
        let basis = |k: usize| {
            let mut f = [0.0; 4];
            f[k] = 1.0;
            Mat2::from_flat(f)
        };
        let mut dirs = Vec::with_capacity(FIXED_DIRECTIONS);
        for k in 0..4 {
            dirs.push(basis(k));
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for a in 0..4 {
            for b in a + 1..4 {
                dirs.push((basis(a) + basis(b)) * s);
                dirs.push((basis(a) - basis(b)) * s);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        while dirs.len() < FIXED_DIRECTIONS {
            dirs.push(random_unit_matrix(&mut rng));
        }
        dirs.try_into().expect("exactly 32 directions")
    })
}

fn sample_directions(sample: &Sample) -> Vec<Mat2<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(sample.dir_seed);
    let mut dirs = fixed_directions().to_vec();
    dirs.extend((0..RANDOM_DIRECTIONS).map(|_| random_unit_matrix(&mut rng)));
    dirs
}

fn quad_form(m: &[[f64; 4]; 4], l: &Mat2<f64>) -> f64 {
    let f = l.to_flat();
    let mut acc = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            acc += f[r] * m[r][c] * f[c];
        }
    }
    acc
}

/// `max |F_fd - F| / max(|F|, floor)` between an analytic Jacobian and central
/// differences of `field`, in flat row-major indices.
fn fd_jacobian_error<F>(field: F, z: &Mat2<f64>, analytic: &[[f64; 4]; 4]) -> f64
where
    F: Fn(&Mat2<f64>) -> [f64; 4],
{
    let h = 1e-6 * (1.0 + z.frobenius());
    let mut worst: f64 = 0.0;
    let scale = analytic.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = scale.max(f64::MIN_POSITIVE);
    let zf = z.to_flat();
    for c in 0..4 {
        let mut plus = zf;
        let mut minus = zf;
        plus[c] += h;
        minus[c] -= h;
        let fp = field(&Mat2::from_flat(plus));
        let fm = field(&Mat2::from_flat(minus));
        for r in 0..4 {
            let fd = (fp[r] - fm[r]) / (2.0 * h);
            worst = worst.max((fd - analytic[r][c]).abs() / scale);
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    /// `nu * weight <= quantity`: the reported constant is the minimum quotient.
    Lower,
    /// `quantity <= L * weight`: the reported constant is the maximum quotient.
    Upper,
    /// A consistency error that must stay below a tolerance.
    Tolerance(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionRow {
    pub condition: &'static str,
    pub kind: BoundKind,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    /// The fitted constant (`nu` for lower bounds, `L` for upper bounds,
    /// the worst error for tolerance checks).
    pub constant: f64,
    /// Positive iff the condition holds: the constant itself for lower
    /// bounds, `1/L` for upper bounds, `tol - worst` for tolerance checks.
    pub margin: f64,
    pub pass: bool,
    /// Index of the extremal sample.
    pub worst_sample: usize,
}

impl BoundKind {
    fn label(&self) -> String {
        match self {
            BoundKind::Lower => "lower".into(),
            BoundKind::Upper => "upper".into(),
            BoundKind::Tolerance(e) => format!("tol=1e-{e}"),
        }
    }

    fn tolerance(&self) -> f64 {
        match self {
            BoundKind::Tolerance(e) => 10f64.powi(-(*e as i32)),
            _ => f64::NAN,
        }
    }
}

fn summarize(condition: &'static str, kind: BoundKind, values: &[(usize, f64)]) -> ConditionRow {
    let mut sorted: Vec<f64> = values.iter().map(|v| v.1).collect();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = match (sorted.first(), sorted.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => (f64::NAN, f64::NAN),
    };
    let median = if sorted.is_empty() { f64::NAN } else { sorted[sorted.len() / 2] };
    let all_finite = values.iter().all(|v| v.1.is_finite());
    let pick = |better: fn(f64, f64) -> bool| {
        values.iter().fold((usize::MAX, f64::NAN), |acc, &(k, v)| {
            if acc.0 == usize::MAX || better(v, acc.1) {
                (k, v)
            } else {
                acc
            }
        })
    };
    let (worst_sample, constant, margin) = match kind {
        BoundKind::Lower => {
            let (k, v) = pick(|a, b| a < b);
            (k, v, v)
        }
        BoundKind::Upper => {
            let (k, v) = pick(|a, b| a > b);
            (k, v, v.recip())
        }
        BoundKind::Tolerance(_) => {
            let (k, v) = pick(|a, b| a > b);
            (k, v, kind.tolerance() - v)
        }
    };
    let pass = !values.is_empty() && all_finite && margin.is_finite() && margin > 0.0;
    ConditionRow { condition, kind, min, median, max, constant, margin, pass, worst_sample }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub target: &'static str,
    pub p: f64,
    pub m_g: f64,
    pub samples: usize,
    pub seed: u64,
    pub rows: Vec<ConditionRow>,
    /// Smallest lower-bound constant.
    pub nu_hat: f64,
    /// Largest upper-bound constant.
    pub l_hat: f64,
}

impl AuditReport {
    fn from_rows(target: &'static str, params: &IntegrandParams<f64>, cloud: &SampleCloud, rows: Vec<ConditionRow>) -> Self {
        let nu_hat = rows
            .iter()
            .filter(|r| r.kind == BoundKind::Lower)
            .map(|r| r.constant)
            .fold(f64::INFINITY, f64::min);
        let l_hat = rows
            .iter()
            .filter(|r| r.kind == BoundKind::Upper)
            .map(|r| r.constant)
            .fold(f64::NEG_INFINITY, f64::max);
        AuditReport { target, p: params.p, m_g: params.m_g, samples: cloud.len(), seed: cloud.seed, rows, nu_hat, l_hat }
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass) && self.nu_hat > 0.0 && self.nu_hat <= self.l_hat
    }

    pub fn ratio(&self) -> f64 {
        self.l_hat / self.nu_hat
    }

    pub fn row(&self, condition: &str) -> Option<&ConditionRow> {
        self.rows.iter().find(|r| r.condition == condition)
    }

    pub fn failures(&self) -> Vec<&ConditionRow> {
        self.rows.iter().filter(|r| !r.pass).collect()
    }

    pub const CSV_HEADER: &'static str = "target,p,condition,bound,min,median,max,constant,margin,pass,worst_sample";

    /// Rows without the header.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
                self.target,
                self.p,
                r.condition,
                r.kind.label(),
                r.min,
                r.median,
                r.max,
                r.constant,
                r.margin,
                r.pass,
                r.worst_sample
            )
            .unwrap();
        }
        out
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}", Self::CSV_HEADER, self.csv_rows())
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        writeln!(out, "[{} p={}]", self.target, self.p).unwrap();
        writeln!(out, "m_g = {:.16e}", self.m_g).unwrap();
        writeln!(out, "samples = {} seed = {}", self.samples, self.seed).unwrap();
        writeln!(out, "nu_hat = {:.16e}", self.nu_hat).unwrap();
        writeln!(out, "L_hat = {:.16e}", self.l_hat).unwrap();
        writeln!(out, "ratio = {:.16e}", self.ratio()).unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{:<16} {:<9} constant={:.6e} margin={:.3e} {}",
                r.condition,
                r.kind.label(),
                r.constant,
                r.margin,
                if r.pass { "PASS" } else { "FAIL" }
            )
            .unwrap();
        }
        writeln!(out, "verdict = {} (sampling audit: no counterexample found is not a proof)", if self.passed() { "PASS" } else { "FAIL" })
            .unwrap();
        out
    }
}

fn non_empty(cloud: &SampleCloud) -> Result<()> {
    if cloud.is_empty() {
        Err(Error::usage("audit needs at least one sample"))
    } else {
        Ok(())
    }
}

struct IntegrandEval {
    fd_error: f64,
    growth_lower: Option<f64>,
    growth_upper: f64,
    ell_lower: f64,
    ell_upper: f64,
    symmetry: Option<f64>,
}

/// Audit of the integrand `f(x, z)`: Hessian against differences of the
/// gradient, `nu |z|^p <= f <= L (1+|z|)^p`, and the two-sided ellipticity
/// bound with weight `(1+|z|)^{p-2} |lambda|^2`.
pub fn audit_integrand(params: &IntegrandParams<f64>, cloud: &SampleCloud) -> Result<AuditReport> {
    non_empty(cloud)?;
    let p = params.p;
    let evals: Vec<Result<IntegrandEval>> = cloud
        .samples
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let zn = s.z.frobenius();
            let f = params.integrand_f(&s.x, &s.z)?;
            let h = params.hess_f_zz_matrix(&s.x, &s.z)?;
            let fd_error = fd_jacobian_error(
                |z| params.grad_f_z(&s.x, z).map(|g| g.to_flat()).unwrap_or([f64::NAN; 4]),
                &s.z,
                &h,
            );
            let weight = (1.0 + zn).powf(p - 2.0);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            let dirs = sample_directions(s);
            for l in &dirs {
                let q = quad_form(&h, l) / weight;
                lo = lo.min(q);
                hi = hi.max(q);
            }
            let symmetry = (k < SYMMETRY_SAMPLES).then(|| {
                let (a, b) = (dirs[0], dirs[FIXED_DIRECTIONS]);
                let polar = (quad_form(&h, &(a + b)) - quad_form(&h, &(a - b))) / 4.0;
                let (af, bf) = (a.to_flat(), b.to_flat());
                let mut ab = 0.0;
                let mut ba = 0.0;
                for r in 0..4 {
                    for c in 0..4 {
                        ab += af[r] * h[r][c] * bf[c];
                        ba += bf[r] * h[r][c] * af[c];
                    }
                }
                let scale = quad_form(&h, &a).abs() + quad_form(&h, &b).abs();
                ((polar - ab).abs().max((ab - ba).abs())) / scale
            });
            Ok(IntegrandEval {
                fd_error,
                growth_lower: (zn > 0.0).then(|| f / zn.powf(p)),
                growth_upper: f / (1.0 + zn).powf(p),
                ell_lower: lo,
                ell_upper: hi,
                symmetry,
            })
        })
        .collect();
    let evals = evals.into_iter().collect::<Result<Vec<_>>>()?;
    let col = |get: &dyn Fn(&IntegrandEval) -> Option<f64>| -> Vec<(usize, f64)> {
        evals.iter().enumerate().filter_map(|(k, e)| get(e).map(|v| (k, v))).collect()
    };
    let rows = vec![
        summarize("GV-f1 hessian", BoundKind::Tolerance(4), &col(&|e| Some(e.fd_error))),
        summarize("GV-f2 lower", BoundKind::Lower, &col(&|e| e.growth_lower)),
        summarize("GV-f2 upper", BoundKind::Upper, &col(&|e| Some(e.growth_upper))),
        summarize("GV-f3 lower", BoundKind::Lower, &col(&|e| Some(e.ell_lower))),
        summarize("GV-f3 upper", BoundKind::Upper, &col(&|e| Some(e.ell_upper))),
        summarize("GV-f3 symmetry", BoundKind::Tolerance(10), &col(&|e| e.symmetry)),
    ];
    Ok(AuditReport::from_rows("integrand", params, cloud, rows))
}

struct CoefficientEval {
    fd_error: f64,
    growth: f64,
    ell_lower: f64,
    continuity: Option<f64>,
}

/// Audit of the coefficients `a(u, z)`: `D_z a` against differences of `a`,
/// `|a| + |D_z a| (1+|z|) <= L (1+|z|)^{p-1}`, the ellipticity lower bound,
/// and `|a(u,z) - a(u_bar,z)| <= L (1+|z|)^{p-1} min{|u-u_bar|, 1}`.
pub fn audit_coefficients(params: &IntegrandParams<f64>, cloud: &SampleCloud) -> Result<AuditReport> {
    non_empty(cloud)?;
    let p = params.p;
    let evals: Vec<CoefficientEval> = cloud
        .samples
        .par_iter()
        .map(|s| {
            let zn = s.z.frobenius();
            let a = params.coeff_a(&s.u, &s.z);
            let dza = params.d_z_coeff_a(&s.u, &s.z).to_matrix();
            let fd_error = fd_jacobian_error(|z| params.coeff_a(&s.u, z).to_flat(), &s.z, &dza);
            let dza_norm = dza.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
            let growth = (a.frobenius() + dza_norm * (1.0 + zn)) / (1.0 + zn).powf(p - 1.0);
            let weight = (1.0 + zn).powf(p - 2.0);
            let ell_lower = sample_directions(s)
                .iter()
                .map(|l| quad_form(&dza, l) / weight)
                .fold(f64::INFINITY, f64::min);
            let du = (s.u - s.u_bar).norm();
            let continuity = (du > 0.0).then(|| {
                let diff = (a - params.coeff_a(&s.u_bar, &s.z)).frobenius();
                diff / ((1.0 + zn).powf(p - 1.0) * du.min(1.0))
            });
            CoefficientEval { fd_error, growth, ell_lower, continuity }
        })
        .collect();
    let col = |get: &dyn Fn(&CoefficientEval) -> Option<f64>| -> Vec<(usize, f64)> {
        evals.iter().enumerate().filter_map(|(k, e)| get(e).map(|v| (k, v))).collect()
    };
    let rows = vec![
        summarize("GV1 derivative", BoundKind::Tolerance(4), &col(&|e| Some(e.fd_error))),
        summarize("GV2 growth", BoundKind::Upper, &col(&|e| Some(e.growth))),
        summarize("GV3 ellipticity", BoundKind::Lower, &col(&|e| Some(e.ell_lower))),
        summarize("GV4 continuity", BoundKind::Upper, &col(&|e| e.continuity)),
    ];
    Ok(AuditReport::from_rows("coefficients", params, cloud, rows))
}

/// Ellipticity constants of the Hessian of `f` and of `D_z a(x/|x|, .)` on the
/// same samples and directions, the former divided by `p m_g` (the factor
/// between `D_z f` and `a` once the cutoff has switched off).
pub fn ellipticity_cross_check(params: &IntegrandParams<f64>, cloud: &SampleCloud) -> Result<(f64, f64)> {
    non_empty(cloud)?;
    let p = params.p;
    let pairs: Vec<Result<(f64, f64)>> = cloud
        .samples
        .par_iter()
        .map(|s| {
            let h = params.hess_f_zz_matrix(&s.x, &s.z)?;
            let d = params.d_z_coeff_a(&s.x, &s.z).to_matrix();
            let weight = (1.0 + s.z.frobenius()).powf(p - 2.0);
            let (mut a, mut b) = (f64::INFINITY, f64::INFINITY);
            for l in sample_directions(s) {
                a = a.min(quad_form(&h, &l) / weight);
                b = b.min(quad_form(&d, &l) / weight);
            }
            Ok((a, b))
        })
        .collect();
    let pairs = pairs.into_iter().collect::<Result<Vec<_>>>()?;
    let nu_f = pairs.iter().map(|v| v.0).fold(f64::INFINITY, f64::min) / (p * params.m_g);
    let nu_a = pairs.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    Ok((nu_f, nu_a))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioRow {
    pub p: f64,
    pub m_g: f64,
    pub nu_hat: f64,
    pub l_hat: f64,
    pub ratio: f64,
}

/// Empirical `L/nu` of the coefficients along an increasing grid in `(1, 2)`.
pub fn ratio_curve(p_grid: &[f64], cloud: &SampleCloud) -> Result<Vec<RatioRow>> {
    if p_grid.is_empty() {
        return Err(Error::usage("p grid is empty"));
    }
    if let Some(bad) = p_grid.iter().find(|p| !(**p > 1.0 && **p < 2.0)) {
        return Err(Error::domain(format!("grid value {bad} lies outside (1, 2)")));
    }
    if p_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::usage("p grid must be strictly increasing"));
    }
    p_grid
        .iter()
        .map(|&p| {
            let params = make_params(p)?;
            let report = audit_coefficients(&params, cloud)?;
            Ok(RatioRow { p, m_g: params.m_g, nu_hat: report.nu_hat, l_hat: report.l_hat, ratio: report.ratio() })
        })
        .collect()
}

/// True when the ratio increases strictly over the last three grid points
/// (vacuously true for shorter grids).
pub fn tail_increasing(rows: &[RatioRow]) -> bool {
    let tail = &rows[rows.len().saturating_sub(3)..];
    tail.windows(2).all(|w| w[1].ratio > w[0].ratio)
}

pub fn ratio_csv(rows: &[RatioRow]) -> String {
    let mut out = String::from("p,m_g,nu_hat,l_hat,ratio\n");
    for r in rows {
        writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", r.p, r.m_g, r.nu_hat, r.l_hat, r.ratio).unwrap();
    }
    out
}
