//! Decay measurements on balls `B_rho(x0)`: Morrey energy, mean oscillation
//! (excess) of `V(Dw)`, and the pointwise oscillation of `w` itself.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fem::{DiscreteField, DiskMesh};
use crate::quadrature::{build_rule, DiskRule};
use crate::singular::{du_sing, u_sing};
use crate::sum::pairwise;
use crate::tensor::{outer, v_map_mat, Mat2, Vec2};

/// Minimum number of radii for a slope fit.
pub const MIN_FIT_RADII: usize = 4;
/// Fits with a larger root-mean-square residual (in log2 units) are reported
/// but not asserted.
pub const FIT_RESIDUAL_GATE: f64 = 0.1;

/// A field `w` with its gradient `Dw`.
pub trait FieldSampler: Sync {
    fn value(&self, x: &Vec2<f64>) -> Result<Vec2<f64>>;
    fn gradient(&self, x: &Vec2<f64>) -> Result<Mat2<f64>>;

    /// A point where `Dw` is known to be unbounded.
    fn singular_point(&self) -> Option<Vec2<f64>> {
        None
    }

    /// Resolution below which measurements stop being meaningful.
    fn resolution(&self) -> Option<f64> {
        None
    }
}

/// `x / |x|` in closed form.
#[derive(Clone, Copy, Debug, Default)]
pub struct SingularField;

impl FieldSampler for SingularField {
    fn value(&self, x: &Vec2<f64>) -> Result<Vec2<f64>> {
        u_sing(x)
    }

    fn gradient(&self, x: &Vec2<f64>) -> Result<Mat2<f64>> {
        du_sing(x)
    }

    fn singular_point(&self) -> Option<Vec2<f64>> {
        Some(Vec2::zero())
    }
}

/// `w(x) = offset + G x`.
#[derive(Clone, Copy, Debug)]
pub struct LinearField {
    pub offset: Vec2<f64>,
    pub gradient: Mat2<f64>,
}

impl FieldSampler for LinearField {
    fn value(&self, x: &Vec2<f64>) -> Result<Vec2<f64>> {
        Ok(self.offset + self.gradient.mul_vec(x))
    }

    fn gradient(&self, _x: &Vec2<f64>) -> Result<Mat2<f64>> {
        Ok(self.gradient)
    }
}

/// Piecewise-linear interpolation of nodal values, with a bucket grid for
/// point location.
pub struct P1Field<'a> {
    mesh: &'a DiskMesh,
    field: &'a DiscreteField,
    cells: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> P1Field<'a> {
    pub fn new(mesh: &'a DiskMesh, field: &'a DiscreteField) -> Result<Self> {
        field.check(mesh)?;
        let cells = ((2.0 / mesh.h).ceil() as usize).clamp(1, 2048);
        let mut buckets = vec![Vec::new(); cells * cells];
        let to_cell = |v: f64| (((v + 1.0) * 0.5 * cells as f64).floor().max(0.0) as usize).min(cells - 1);
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let pts = tri.map(|v| mesh.nodes[v]);
            let (x0, x1) = (pts.iter().map(|p| p.x()).fold(f64::INFINITY, f64::min), pts.iter().map(|p| p.x()).fold(f64::NEG_INFINITY, f64::max));
            let (y0, y1) = (pts.iter().map(|p| p.y()).fold(f64::INFINITY, f64::min), pts.iter().map(|p| p.y()).fold(f64::NEG_INFINITY, f64::max));
            for cy in to_cell(y0)..=to_cell(y1) {
                for cx in to_cell(x0)..=to_cell(x1) {
                    buckets[cy * cells + cx].push(t);
                }
            }
        }
        Ok(P1Field { mesh, field, cells, buckets })
    }

    fn barycentric(&self, t: usize, x: &Vec2<f64>) -> [f64; 3] {
        let [a, b, c] = self.mesh.triangles[t].map(|v| self.mesh.nodes[v]);
        let det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
        let l1 = ((x.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (x.y() - a.y())) / det;
        let l2 = ((b.x() - a.x()) * (x.y() - a.y()) - (x.x() - a.x()) * (b.y() - a.y())) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    /// Containing triangle and barycentric coordinates; points in the thin
    /// gap between the polygon and the unit circle go to the nearest triangle
    /// of their bucket.
    pub fn locate(&self, x: &Vec2<f64>) -> Result<(usize, [f64; 3])> {
        if !x.is_finite() || x.norm() > 1.0 + 1e-12 {
            return Err(Error::domain(format!("point ({}, {}) lies outside the unit disk", x.x(), x.y())));
        }
        let cell = |v: f64| (((v + 1.0) * 0.5 * self.cells as f64).floor().max(0.0) as usize).min(self.cells - 1);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        let consider = |t: usize, best: &mut Option<(usize, [f64; 3], f64)>| {
            let l = self.barycentric(t, x);
            let worst = l[0].min(l[1]).min(l[2]);
            if best.is_none_or(|b| worst > b.2) {
                *best = Some((t, l, worst));
            }
        };
        for &t in &self.buckets[cell(x.y()) * self.cells + cell(x.x())] {
            consider(t, &mut best);
        }
        if best.is_none_or(|b| b.2 < -1e-9) {
            for t in 0..self.mesh.triangles.len() {
                consider(t, &mut best);
            }
        }
        let (t, l, _) = best.ok_or_else(|| Error::Internal("mesh has no triangles".into()))?;
        Ok((t, l))
    }
}

impl FieldSampler for P1Field<'_> {
    fn value(&self, x: &Vec2<f64>) -> Result<Vec2<f64>> {
        let (t, l) = self.locate(x)?;
        let tri = self.mesh.triangles[t];
        Ok((0..3).fold(Vec2::zero(), |acc, a| acc + self.field.values[tri[a]] * l[a]))
    }

    fn gradient(&self, x: &Vec2<f64>) -> Result<Mat2<f64>> {
        let (t, _) = self.locate(x)?;
        let [a, b, c] = self.mesh.triangles[t].map(|v| self.mesh.nodes[v]);
        let inv = 0.5 / self.mesh.area(t);
        let grads = [
            Vec2::new(b.y() - c.y(), c.x() - b.x()) * inv,
            Vec2::new(c.y() - a.y(), a.x() - c.x()) * inv,
            Vec2::new(a.y() - b.y(), b.x() - a.x()) * inv,
        ];
        let tri = self.mesh.triangles[t];
        Ok((0..3).fold(Mat2::zero(), |acc, k| acc + outer(&self.field.values[tri[k]], &grads[k])))
    }

    fn resolution(&self) -> Option<f64> {
        Some(self.mesh.h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// `int_{B_rho} (1 + |V(Dw)|^2)`.
    Morrey,
    /// `int_{B_rho} |V(Dw) - mean V(Dw)|^2`.
    Excess,
    /// `max |w(a) - w(b)|` over a polar net in `B_rho`.
    Oscillation,
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::Morrey => "morrey",
            Quantity::Excess => "excess",
            Quantity::Oscillation => "oscillation",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "morrey" => Ok(Quantity::Morrey),
            "excess" => Ok(Quantity::Excess),
            "oscillation" | "osc" => Ok(Quantity::Oscillation),
            other => Err(Error::usage(format!("unknown quantity '{other}' (morrey, excess, oscillation)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Continuous,
    Discontinuous,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Continuous => "continuous",
            Verdict::Discontinuous => "discontinuous",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeOptions {
    /// Exponent of the V-function.
    pub p: f64,
    pub n_r: usize,
    pub n_theta: usize,
    /// Radial grading used when the ball is centred at the field's singular point.
    pub gamma: f64,
    pub net_rings: usize,
    /// Angles per ring of the oscillation net (kept even so antipodes are sampled).
    pub net_angles: usize,
}

impl ProbeOptions {
    pub fn new(p: f64) -> Self {
        ProbeOptions { p, n_r: 200, n_theta: 64, gamma: 4.0, net_rings: 16, net_angles: 48 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayTable {
    pub quantity: Quantity,
    pub center: Vec2<f64>,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares slope of `log2 value` against `log2 radius`.
    pub slope: f64,
    /// Root-mean-square residual of that fit.
    pub residual: f64,
    /// Oscillation tables only.
    pub verdict: Option<Verdict>,
}

impl DecayTable {
    /// Slope between consecutive radii; `None` for the first radius.
    pub fn running_slopes(&self) -> Vec<Option<f64>> {
        (0..self.radii.len())
            .map(|k| {
                (k > 0).then(|| {
                    (self.values[k] / self.values[k - 1]).log2() / (self.radii[k] / self.radii[k - 1]).log2()
                })
            })
            .collect()
    }

    /// The fitted slope when enough radii were used and the fit is clean.
    pub fn asserted_slope(&self) -> Option<f64> {
        (self.radii.len() >= MIN_FIT_RADII && self.residual <= FIT_RESIDUAL_GATE && self.slope.is_finite())
            .then_some(self.slope)
    }

    /// `2 - slope` for Morrey tables.
    pub fn mu(&self) -> Option<f64> {
        (self.quantity == Quantity::Morrey).then_some(2.0 - self.slope)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("radius,value,running_slope\n");
        for ((r, v), s) in self.radii.iter().zip(&self.values).zip(self.running_slopes()) {
            let s = s.filter(|s| s.is_finite()).map(|s| format!("{s:.16e}")).unwrap_or_default();
            writeln!(out, "{r:.16e},{v:.16e},{s}").unwrap();
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        writeln!(out, "quantity = {}", self.quantity.name()).unwrap();
        writeln!(out, "center = ({:.16e}, {:.16e})", self.center.x(), self.center.y()).unwrap();
        writeln!(out, "radii = {}", self.radii.len()).unwrap();
        writeln!(out, "slope = {:.16e}", self.slope).unwrap();
        writeln!(out, "fit_residual = {:.16e}", self.residual).unwrap();
        writeln!(out, "slope_asserted = {}", self.asserted_slope().is_some()).unwrap();
        if let Some(mu) = self.mu() {
            writeln!(out, "mu = {mu:.16e}").unwrap();
        }
        if let Some(v) = self.verdict {
            writeln!(out, "verdict = {} (heuristic: oscillation fails to halve)", v.label()).unwrap();
        }
        out
    }
}

/// Ordinary least squares `y = a + s x`; returns `(s, rms residual)`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len();
    if n < 2 || x.len() != y.len() || y.iter().any(|v| !v.is_finite()) {
        return (f64::NAN, f64::NAN);
    }
    let mx = pairwise(x) / n as f64;
    let my = pairwise(y) / n as f64;
    let sxy: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let sxx: Vec<f64> = x.iter().map(|a| (a - mx) * (a - mx)).collect();
    let slope = pairwise(&sxy) / pairwise(&sxx);
    let res: Vec<f64> = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).collect();
    (slope, (pairwise(&res) / n as f64).sqrt())
}

/// Eight radii halving from `0.5 (1 - |x0|)`.
pub fn default_radii(x0: &Vec2<f64>) -> Vec<f64> {
    let start = 0.5 * (1.0 - x0.norm());
    (0..8).map(|k| start * 0.5f64.powi(k)).collect()
}

/// Radii halving from `0.8 (1 - |x0|)` while at least `h`.
pub fn mesh_radii(x0: &Vec2<f64>, h: f64) -> Vec<f64> {
    let mut radii = Vec::new();
    let mut r = 0.8 * (1.0 - x0.norm());
    while r >= h && radii.len() < 64 {
        radii.push(r);
        r *= 0.5;
    }
    radii
}

fn check_balls(x0: &Vec2<f64>, radii: &[f64]) -> Result<()> {
    if !x0.is_finite() {
        return Err(Error::domain("probe centre is not finite"));
    }
    if radii.is_empty() {
        return Err(Error::usage("probe needs at least one radius"));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::usage("radii must be strictly decreasing"));
    }
    for r in radii {
        if !(*r > 0.0) || x0.norm() + r > 1.0 + 1e-12 {
            return Err(Error::usage(format!(
                "ball of radius {r} at ({}, {}) leaves the unit disk",
                x0.x(),
                x0.y()
            )));
        }
    }
    Ok(())
}

fn ball_rule(sampler: &dyn FieldSampler, x0: &Vec2<f64>, opts: &ProbeOptions) -> Result<DiskRule> {
    let at_singularity = sampler.singular_point().is_some_and(|s| (s - *x0).norm() == 0.0);
    build_rule(opts.n_r, opts.n_theta, if at_singularity { opts.gamma } else { 1.0 })
}

fn finish(quantity: Quantity, x0: &Vec2<f64>, radii: &[f64], values: Vec<f64>, verdict: Option<Verdict>) -> DecayTable {
    let (slope, residual) = if radii.len() >= 2 && values.iter().all(|v| *v > 0.0) {
        let lx: Vec<f64> = radii.iter().map(|r| r.log2()).collect();
        let ly: Vec<f64> = values.iter().map(|v| v.log2()).collect();
        fit_slope(&lx, &ly)
    } else {
        (f64::NAN, f64::NAN)
    };
    DecayTable { quantity, center: *x0, radii: radii.to_vec(), values, slope, residual, verdict }
}

fn v_values(sampler: &dyn FieldSampler, rule: &DiskRule, p: f64) -> Result<Vec<Mat2<f64>>> {
    use rayon::prelude::*;
    let vals: Vec<Result<Mat2<f64>>> = rule.nodes.par_iter().map(|x| v_map_mat(&sampler.gradient(x)?, p)).collect();
    vals.into_iter().collect()
}

pub fn morrey_decay(sampler: &dyn FieldSampler, x0: &Vec2<f64>, radii: &[f64], opts: &ProbeOptions) -> Result<DecayTable> {
    check_balls(x0, radii)?;
    let base = ball_rule(sampler, x0, opts)?;
    let values = radii
        .iter()
        .map(|&r| {
            let rule = base.mapped(x0, r);
            let v = v_values(sampler, &rule, opts.p)?;
            let terms: Vec<f64> = v.iter().zip(&rule.weights).map(|(v, w)| w * (1.0 + v.frobenius_sq())).collect();
            Ok(pairwise(&terms))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(Quantity::Morrey, x0, radii, values, None))
}

pub fn excess_decay(sampler: &dyn FieldSampler, x0: &Vec2<f64>, radii: &[f64], opts: &ProbeOptions) -> Result<DecayTable> {
    check_balls(x0, radii)?;
    let base = ball_rule(sampler, x0, opts)?;
    let values = radii
        .iter()
        .map(|&r| {
            let rule = base.mapped(x0, r);
            let v = v_values(sampler, &rule, opts.p)?;
            let area = rule.total_weight();
            let mut mean = [0.0; 4];
            for (c, slot) in mean.iter_mut().enumerate() {
                let terms: Vec<f64> = v.iter().zip(&rule.weights).map(|(v, w)| w * v.to_flat()[c]).collect();
                *slot = pairwise(&terms) / area;
            }
            let mean = Mat2::from_flat(mean);
            let terms: Vec<f64> = v.iter().zip(&rule.weights).map(|(v, w)| w * (*v - mean).frobenius_sq()).collect();
            Ok(pairwise(&terms))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(Quantity::Excess, x0, radii, values, None))
}

/// Polar net of `rings x angles` points in the closed ball, centre excluded.
pub fn polar_net(x0: &Vec2<f64>, radius: f64, rings: usize, angles: usize) -> Vec<Vec2<f64>> {
    let mut pts = Vec::with_capacity(rings * angles);
    for k in 1..=rings {
        let r = radius * k as f64 / rings as f64;
        for j in 0..angles {
            let t = std::f64::consts::TAU * j as f64 / angles as f64;
            pts.push(*x0 + Vec2::new(r * t.cos(), r * t.sin()));
        }
    }
    pts
}

/// Oscillation over shrinking balls. The verdict is "discontinuous" when
/// the oscillation on the smallest ball is still at least half of that on
/// the largest one; it is a heuristic, not a proof.
pub fn oscillation_probe(sampler: &dyn FieldSampler, x0: &Vec2<f64>, radii: &[f64], opts: &ProbeOptions) -> Result<DecayTable> {
    check_balls(x0, radii)?;
    if opts.net_rings == 0 || opts.net_angles < 2 || !opts.net_angles.is_multiple_of(2) {
        return Err(Error::usage("oscillation net needs at least one ring and an even angle count"));
    }
    let values = radii
        .iter()
        .map(|&r| {
            let pts = polar_net(x0, r, opts.net_rings, opts.net_angles);
            let vals = pts.iter().map(|x| sampler.value(x)).collect::<Result<Vec<_>>>()?;
            let mut osc: f64 = 0.0;
            for (i, a) in vals.iter().enumerate() {
                for b in &vals[i + 1..] {
                    osc = osc.max((*a - *b).norm());
                }
            }
            Ok(osc)
        })
        .collect::<Result<Vec<_>>>()?;
    let (first, last) = (values[0], values[values.len() - 1]);
    let verdict = if first > 0.0 && last >= 0.5 * first { Verdict::Discontinuous } else { Verdict::Continuous };
    Ok(finish(Quantity::Oscillation, x0, radii, values, Some(verdict)))
}

pub fn probe(
    quantity: Quantity,
    sampler: &dyn FieldSampler,
    x0: &Vec2<f64>,
    radii: &[f64],
    opts: &ProbeOptions,
) -> Result<DecayTable> {
    match quantity {
        Quantity::Morrey => morrey_decay(sampler, x0, radii, opts),
        Quantity::Excess => excess_decay(sampler, x0, radii, opts),
        Quantity::Oscillation => oscillation_probe(sampler, x0, radii, opts),
    }
}
