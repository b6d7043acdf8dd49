//! P1 discretisation of the convex functional `F[w] = int f(x, Dw)` with
//! Dirichlet data `x/|x|`, its exact gradient and Hessian, a damped Newton
//! minimiser, and a Picard iteration for the `u`-dependent system
//! `div a(w, Dw) = 0`.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::mesh::{DiscreteField, DiskMesh};
use super::sparse::{bicgstab, dot, norm, pcg, CsrMatrix};
use crate::error::{Error, Result};
use crate::integrand::IntegrandParams;
use crate::singular::{du_sing, u_sing};
use crate::sum::pairwise;
use crate::tensor::{outer, v_map_mat, Mat2, Vec2};

// interior three-point rule, exact for quadratics
const BARY: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];

#[derive(Clone, Copy, Debug)]
struct Element {
    nodes: [usize; 3],
    area: f64,
    grads: [Vec2<f64>; 3],
    qpts: [Vec2<f64>; 3],
}

impl Element {
    fn gradient(&self, w: &[Vec2<f64>]) -> Mat2<f64> {
        let mut dw = Mat2::zero();
        for a in 0..3 {
            dw += outer(&w[self.nodes[a]], &self.grads[a]);
        }
        dw
    }

    fn value_at(&self, w: &[Vec2<f64>], q: usize) -> Vec2<f64> {
        let mut v = Vec2::zero();
        for a in 0..3 {
            v += w[self.nodes[a]] * BARY[q][a];
        }
        v
    }
}

/// Precomputed element geometry and the numbering of free (interior) unknowns.
pub struct Discretization<'m> {
    pub mesh: &'m DiskMesh,
    elements: Vec<Element>,
    free_index: Vec<Option<usize>>,
    n_free: usize,
}

impl<'m> Discretization<'m> {
    pub fn new(mesh: &'m DiskMesh) -> Result<Self> {
        let mut elements = Vec::with_capacity(mesh.triangles.len());
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|v| mesh.nodes[v]);
            let area = mesh.area(t);
            if area <= 0.0 {
                return Err(Error::Internal(format!("triangle {t} is degenerate or inverted")));
            }
            let inv = 0.5 / area;
            let grads = [
                Vec2::new(b.y() - c.y(), c.x() - b.x()) * inv,
                Vec2::new(c.y() - a.y(), a.x() - c.x()) * inv,
                Vec2::new(a.y() - b.y(), b.x() - a.x()) * inv,
            ];
            let qpts = BARY.map(|l| a * l[0] + b * l[1] + c * l[2]);
            if qpts.iter().any(|q| q.norm() == 0.0) {
                return Err(Error::Internal(format!("quadrature point of triangle {t} sits at the origin")));
            }
            elements.push(Element { nodes: *tri, area, grads, qpts });
        }
        let mut free_index = vec![None; mesh.nodes.len()];
        let mut n_free = 0;
        for (k, b) in mesh.boundary.iter().enumerate() {
            if !b {
                free_index[k] = Some(n_free);
                n_free += 1;
            }
        }
        Ok(Discretization { mesh, elements, free_index, n_free })
    }

    /// Number of scalar unknowns (two per interior node).
    pub fn dofs(&self) -> usize {
        2 * self.n_free
    }

    pub fn free_vector(&self, w: &DiscreteField) -> Vec<f64> {
        let mut x = vec![0.0; self.dofs()];
        for (k, idx) in self.free_index.iter().enumerate() {
            if let Some(f) = idx {
                x[2 * f] = w.values[k].x();
                x[2 * f + 1] = w.values[k].y();
            }
        }
        x
    }

    pub fn with_free(&self, w: &DiscreteField, x: &[f64]) -> DiscreteField {
        let mut out = w.clone();
        for (k, idx) in self.free_index.iter().enumerate() {
            if let Some(f) = idx {
                out.values[k] = Vec2::new(x[2 * f], x[2 * f + 1]);
            }
        }
        out
    }

    fn sparsity(&self) -> CsrMatrix {
        let mut entries = Vec::new();
        for e in &self.elements {
            for a in e.nodes.iter().filter_map(|&v| self.free_index[v]) {
                for b in e.nodes.iter().filter_map(|&v| self.free_index[v]) {
                    for i in 0..2 {
                        for j in 0..2 {
                            entries.push((2 * a + i, 2 * b + j));
                        }
                    }
                }
            }
        }
        CsrMatrix::with_pattern(self.dofs(), entries)
    }

    pub fn energy(&self, params: &IntegrandParams<f64>, w: &DiscreteField) -> Result<f64> {
        w.check(self.mesh)?;
        let parts: Vec<Result<f64>> = self
            .elements
            .par_iter()
            .map(|e| {
                let dw = e.gradient(&w.values);
                let mut acc = 0.0;
                for q in &e.qpts {
                    acc += params.integrand_f(q, &dw)?;
                }
                Ok(acc * e.area / 3.0)
            })
            .collect();
        Ok(pairwise(&parts.into_iter().collect::<Result<Vec<_>>>()?))
    }

    // per-element map of (node, component) -> (row, col) contributions
    fn scatter_vector(&self, locals: &[[[f64; 2]; 3]], elements: &[Element]) -> Vec<f64> {
        let mut g = vec![0.0; self.dofs()];
        for (e, local) in elements.iter().zip(locals) {
            for a in 0..3 {
                if let Some(f) = self.free_index[e.nodes[a]] {
                    g[2 * f] += local[a][0];
                    g[2 * f + 1] += local[a][1];
                }
            }
        }
        g
    }

    fn scatter_matrix(&self, locals: &[[[f64; 6]; 6]]) -> CsrMatrix {
        let mut m = self.sparsity();
        for (e, local) in self.elements.iter().zip(locals) {
            for a in 0..3 {
                let Some(fa) = self.free_index[e.nodes[a]] else { continue };
                for b in 0..3 {
                    let Some(fb) = self.free_index[e.nodes[b]] else { continue };
                    for i in 0..2 {
                        for j in 0..2 {
                            m.add(2 * fa + i, 2 * fb + j, local[2 * a + i][2 * b + j]);
                        }
                    }
                }
            }
        }
        m
    }

    /// `dF/dw` with respect to the free nodal values.
    pub fn gradient(&self, params: &IntegrandParams<f64>, w: &DiscreteField) -> Result<Vec<f64>> {
        w.check(self.mesh)?;
        let locals: Vec<Result<[[f64; 2]; 3]>> = self
            .elements
            .par_iter()
            .map(|e| {
                let dw = e.gradient(&w.values);
                let mut flux = Mat2::zero();
                for q in &e.qpts {
                    flux += params.grad_f_z(q, &dw)?;
                }
                let flux = flux * (e.area / 3.0);
                Ok(local_load(e, &flux))
            })
            .collect();
        let locals = locals.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(self.scatter_vector(&locals, &self.elements))
    }

    /// `d^2 F / dw^2` on the free nodal values (symmetric positive definite).
    pub fn hessian(&self, params: &IntegrandParams<f64>, w: &DiscreteField) -> Result<CsrMatrix> {
        w.check(self.mesh)?;
        let locals: Vec<Result<[[f64; 6]; 6]>> = self
            .elements
            .par_iter()
            .map(|e| {
                let dw = e.gradient(&w.values);
                let mut h = [[0.0; 4]; 4];
                for q in &e.qpts {
                    let hq = params.hess_f_zz_matrix(q, &dw)?;
                    for r in 0..4 {
                        for c in 0..4 {
                            h[r][c] += hq[r][c];
                        }
                    }
                }
                Ok(local_stiffness(e, &h, e.area / 3.0))
            })
            .collect();
        let locals = locals.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(self.scatter_matrix(&locals))
    }

    /// Frozen values of the first argument of `a(u, z)` at every quadrature point.
    fn frozen_values(&self, frozen: &Frozen) -> Vec<[Vec2<f64>; 3]> {
        self.elements
            .iter()
            .map(|e| match frozen {
                Frozen::Field(w) => [0, 1, 2].map(|q| e.value_at(&w.values, q)),
                Frozen::Singular => e.qpts.map(|x| u_sing(&x).expect("quadrature points avoid the origin")),
            })
            .collect()
    }

    /// `int a(U, Dw) : D phi_a` for every free basis function, with `U` frozen.
    fn coefficient_residual(&self, params: &IntegrandParams<f64>, frozen: &[[Vec2<f64>; 3]], w: &DiscreteField) -> Vec<f64> {
        let locals: Vec<[[f64; 2]; 3]> = self
            .elements
            .par_iter()
            .zip(frozen.par_iter())
            .map(|(e, us)| {
                let dw = e.gradient(&w.values);
                let mut flux = Mat2::zero();
                for u in us {
                    flux += params.coeff_a(u, &dw);
                }
                local_load(e, &(flux * (e.area / 3.0)))
            })
            .collect();
        self.scatter_vector(&locals, &self.elements)
    }

    fn coefficient_jacobian(&self, params: &IntegrandParams<f64>, frozen: &[[Vec2<f64>; 3]], w: &DiscreteField) -> CsrMatrix {
        let locals: Vec<[[f64; 6]; 6]> = self
            .elements
            .par_iter()
            .zip(frozen.par_iter())
            .map(|(e, us)| {
                let dw = e.gradient(&w.values);
                let mut h = [[0.0; 4]; 4];
                for u in us {
                    let m = params.d_z_coeff_a(u, &dw).to_matrix();
                    for r in 0..4 {
                        for c in 0..4 {
                            h[r][c] += m[r][c];
                        }
                    }
                }
                local_stiffness(e, &h, e.area / 3.0)
            })
            .collect();
        self.scatter_matrix(&locals)
    }

    /// Norm of the discrete residual of `div a(w, Dw) = 0` (`u` taken from `w` itself).
    pub fn fixed_point_residual(&self, params: &IntegrandParams<f64>, w: &DiscreteField) -> Result<f64> {
        w.check(self.mesh)?;
        let frozen = self.frozen_values(&Frozen::Field(w.clone()));
        Ok(norm(&self.coefficient_residual(params, &frozen, w)))
    }

    /// `int |V(Dw) - V(Du)|^2` against the singular map, on each triangle
    /// split twice into four (48 interior points per triangle).
    pub fn v_distance(&self, w: &DiscreteField, p: f64) -> Result<f64> {
        w.check(self.mesh)?;
        let parts: Vec<Result<f64>> = self
            .elements
            .par_iter()
            .map(|e| {
                let vw = v_map_mat(&e.gradient(&w.values), p)?;
                let [a, b, c] = e.nodes.map(|v| self.mesh.nodes[v]);
                let mut acc = 0.0;
                for (sa, sb, sc) in subdivide(a, b, c, 2) {
                    for l in BARY {
                        let x = sa * l[0] + sb * l[1] + sc * l[2];
                        let vu = v_map_mat(&du_sing(&x)?, p)?;
                        acc += (vw - vu).frobenius_sq();
                    }
                }
                Ok(acc * e.area / (3.0 * 16.0))
            })
            .collect();
        Ok(pairwise(&parts.into_iter().collect::<Result<Vec<_>>>()?))
    }

    /// `int |V(Dw) - V(Dv)|^2` between two discrete fields (exact for P1).
    pub fn v_distance_between(&self, w: &DiscreteField, v: &DiscreteField, p: f64) -> Result<f64> {
        w.check(self.mesh)?;
        v.check(self.mesh)?;
        let parts: Vec<Result<f64>> = self
            .elements
            .par_iter()
            .map(|e| {
                let a = v_map_mat(&e.gradient(&w.values), p)?;
                let b = v_map_mat(&e.gradient(&v.values), p)?;
                Ok((a - b).frobenius_sq() * e.area)
            })
            .collect();
        Ok(pairwise(&parts.into_iter().collect::<Result<Vec<_>>>()?))
    }
}

fn subdivide(a: Vec2<f64>, b: Vec2<f64>, c: Vec2<f64>, levels: u32) -> Vec<(Vec2<f64>, Vec2<f64>, Vec2<f64>)> {
    if levels == 0 {
        return vec![(a, b, c)];
    }
    let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
    [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        .into_iter()
        .flat_map(|(x, y, z)| subdivide(x, y, z, levels - 1))
        .collect()
}

fn local_load(e: &Element, flux: &Mat2<f64>) -> [[f64; 2]; 3] {
    let mut out = [[0.0; 2]; 3];
    for a in 0..3 {
        out[a] = flux.mul_vec(&e.grads[a]).0;
    }
    out
}

// K[(a,i),(b,j)] = scale * sum_{k,l} H[2i+k][2j+l] grad_a[k] grad_b[l]
fn local_stiffness(e: &Element, h: &[[f64; 4]; 4], scale: f64) -> [[f64; 6]; 6] {
    let mut out = [[0.0; 6]; 6];
    for a in 0..3 {
        for b in 0..3 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = 0.0;
                    for k in 0..2 {
                        for l in 0..2 {
                            acc += h[2 * i + k][2 * j + l] * e.grads[a].0[k] * e.grads[b].0[l];
                        }
                    }
                    out[2 * a + i][2 * b + j] = scale * acc;
                }
            }
        }
    }
    out
}

/// Where the first argument of `a(u, z)` is frozen during a Picard step.
#[derive(Clone, Debug)]
pub enum Frozen {
    Field(DiscreteField),
    /// The exact `x/|x|` at each quadrature point.
    Singular,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogRow {
    pub iter: usize,
    /// `None` for iterations that have no energy (the Picard solver).
    pub energy: Option<f64>,
    pub grad_norm: f64,
    /// Step length accepted after this row's state (0 on the last row).
    pub step: f64,
    /// Krylov iterations spent on that step.
    pub cg_iters: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveLog {
    pub rows: Vec<LogRow>,
}

impl SolveLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,energy,grad_norm,step,cg_iters\n");
        for r in &self.rows {
            let energy = r.energy.map(|e| format!("{e:.16e}")).unwrap_or_default();
            writeln!(out, "{},{},{:.16e},{:.16e},{}", r.iter, energy, r.grad_norm, r.step, r.cg_iters).unwrap();
        }
        out
    }

    /// True when the logged energies never increase.
    pub fn energy_non_increasing(&self) -> bool {
        let es: Vec<f64> = self.rows.iter().filter_map(|r| r.energy).collect();
        es.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn last(&self) -> Option<&LogRow> {
        self.rows.last()
    }

    fn finish_row(&mut self, step: f64, iters: usize) {
        if let Some(r) = self.rows.last_mut() {
            r.step = step;
            r.cg_iters = iters;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    /// Stop once `|grad| <= tol (1 + |energy|)`.
    pub tol: f64,
    pub max_iter: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub armijo: f64,
    pub shrink: f64,
    pub max_halvings: usize,
}

impl NewtonOptions {
    pub fn new(tol: f64) -> Self {
        NewtonOptions {
            tol,
            max_iter: 100,
            cg_tol: 1e-8,
            cg_max_iter: 20_000,
            armijo: 1e-4,
            shrink: 0.5,
            max_halvings: 50,
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::usage(format!("tolerance must be positive, got {tol}")))
    }
}

pub fn energy(params: &IntegrandParams<f64>, mesh: &DiskMesh, w: &DiscreteField) -> Result<f64> {
    Discretization::new(mesh)?.energy(params, w)
}

pub fn assemble_gradient(params: &IntegrandParams<f64>, mesh: &DiskMesh, w: &DiscreteField) -> Result<Vec<f64>> {
    Discretization::new(mesh)?.gradient(params, w)
}

pub fn assemble_hessian(params: &IntegrandParams<f64>, mesh: &DiskMesh, w: &DiscreteField) -> Result<CsrMatrix> {
    Discretization::new(mesh)?.hessian(params, w)
}

/// Damped Newton from the interpolant of `x/|x|`.
pub fn minimize(params: &IntegrandParams<f64>, mesh: &DiskMesh, tol: f64) -> Result<(DiscreteField, SolveLog)> {
    minimize_from(params, mesh, DiscreteField::singular_interpolant(mesh), &NewtonOptions::new(tol))
}

/// Damped Newton with Armijo backtracking and CG inner solves.
pub fn minimize_from(
    params: &IntegrandParams<f64>,
    mesh: &DiskMesh,
    init: DiscreteField,
    opts: &NewtonOptions,
) -> Result<(DiscreteField, SolveLog)> {
    check_tol(opts.tol)?;
    let disc = Discretization::new(mesh)?;
    init.check(mesh)?;
    let mut w = init;
    let mut x = disc.free_vector(&w);
    let mut e = disc.energy(params, &w)?;
    let mut log = SolveLog::default();
    for iter in 0..=opts.max_iter {
        let g = disc.gradient(params, &w)?;
        let gn = norm(&g);
        log.rows.push(LogRow { iter, energy: Some(e), grad_norm: gn, step: 0.0, cg_iters: 0 });
        if gn <= opts.tol * (1.0 + e.abs()) {
            return Ok((w, log));
        }
        if iter == opts.max_iter {
            break;
        }
        let h = disc.hessian(params, &w)?;
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        let (mut d, krylov) = pcg(&h, &rhs, opts.cg_tol, opts.cg_max_iter);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            d = rhs;
            slope = -gn * gn;
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let wt = disc.with_free(&w, &trial);
            let et = disc.energy(params, &wt)?;
            if et.is_finite() && et <= e + opts.armijo * t * slope {
                accepted = Some((trial, wt, et));
                break;
            }
            t *= opts.shrink;
        }
        let Some((trial, wt, et)) = accepted else {
            return Err(Error::convergence(
                format!("line search failed after {} halvings at iteration {iter}", opts.max_halvings),
                log,
            ));
        };
        log.finish_row(t, krylov.iterations);
        x = trial;
        w = wt;
        e = et;
    }
    Err(Error::convergence(format!("Newton did not reach tolerance in {} iterations", opts.max_iter), log))
}

/// Newton on the frozen system `int a(U, Dw) : D phi = 0` (nonsymmetric
/// Jacobian, BiCGSTAB inner solves, backtracking on the residual norm).
/// Returns the solution and the number of Newton and Krylov iterations.
pub fn solve_frozen(
    params: &IntegrandParams<f64>,
    mesh: &DiskMesh,
    frozen: &Frozen,
    init: DiscreteField,
    tol: f64,
) -> Result<(DiscreteField, usize, usize)> {
    check_tol(tol)?;
    let disc = Discretization::new(mesh)?;
    init.check(mesh)?;
    let frozen = disc.frozen_values(frozen);
    frozen_newton(&disc, params, &frozen, init, tol, 100)
}

fn frozen_newton(
    disc: &Discretization,
    params: &IntegrandParams<f64>,
    frozen: &[[Vec2<f64>; 3]],
    init: DiscreteField,
    tol: f64,
    max_iter: usize,
) -> Result<(DiscreteField, usize, usize)> {
    let mut w = init;
    let mut x = disc.free_vector(&w);
    let mut r = disc.coefficient_residual(params, frozen, &w);
    let mut rn = norm(&r);
    let mut krylov_total = 0;
    for iter in 0..max_iter {
        if rn <= tol {
            return Ok((w, iter, krylov_total));
        }
        let j = disc.coefficient_jacobian(params, frozen, &w);
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let (d, out) = bicgstab(&j, &rhs, 1e-10, 20_000);
        krylov_total += out.iterations;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=50 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let wt = disc.with_free(&w, &trial);
            let rt = disc.coefficient_residual(params, frozen, &wt);
            let rtn = norm(&rt);
            if rtn.is_finite() && rtn <= (1.0 - 1e-4 * t) * rn {
                accepted = Some((trial, wt, rt, rtn));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, wt, rt, rtn)) = accepted else {
            if rn <= 100.0 * tol {
                // residual already at the level the linear solves can resolve
                return Ok((w, iter, krylov_total));
            }
            return Err(Error::convergence(
                format!("frozen Newton line search failed at residual {rn:.3e}"),
                SolveLog::default(),
            ));
        };
        x = trial;
        w = wt;
        r = rt;
        rn = rtn;
    }
    if rn <= tol {
        Ok((w, max_iter, krylov_total))
    } else {
        Err(Error::convergence(
            format!("frozen Newton stopped at residual {rn:.3e} after {max_iter} iterations"),
            SolveLog::default(),
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardOptions {
    /// Stop once the fixed-point residual is at most `tol`.
    pub tol: f64,
    pub max_outer: usize,
    /// Window and factor of the stagnation test: fail when the residual has
    /// not dropped by `min_reduction` over `window` outer iterations.
    pub window: usize,
    pub min_reduction: f64,
    /// Depth of Anderson mixing over past Picard maps (0 gives plain Picard).
    pub anderson: usize,
}

impl PicardOptions {
    pub fn new(tol: f64) -> Self {
        PicardOptions { tol, max_outer: 200, window: 10, min_reduction: 0.01, anderson: 5 }
    }
}

/// Picard iteration from the interpolant of `x/|x|`.
pub fn solve_u_dependent(params: &IntegrandParams<f64>, mesh: &DiskMesh, tol: f64) -> Result<(DiscreteField, SolveLog)> {
    solve_u_dependent_from(params, mesh, DiscreteField::singular_interpolant(mesh), &PicardOptions::new(tol))
}

// Least-squares weights `gamma` minimising |f - dF gamma|, by normal
// equations with a small relative ridge; columns are stored separately.
fn anderson_weights(df: &[Vec<f64>], f: &[f64]) -> Option<Vec<f64>> {
    let m = df.len();
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = dot(&df[i], &df[j]);
        }
        b[i] = dot(&df[i], f);
    }
    let ridge = 1e-12 * (0..m).map(|i| a[i][i]).fold(0.0, f64::max);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += ridge;
    }
    // Gaussian elimination with partial pivoting
    for c in 0..m {
        let piv = (c..m).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))?;
        if a[piv][c].abs() <= f64::MIN_POSITIVE {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..m {
            let factor = a[r][c] / a[c][c];
            for k in c..m {
                a[r][k] -= factor * a[c][k];
            }
            b[r] -= factor * b[c];
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let tail: f64 = (r + 1..m).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - tail) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Outer Picard iteration freezing `u` in `A(u)`, inner Newton in the
/// gradient variable, with optional Anderson mixing of the Picard map.
/// The log's `grad_norm` column holds the fixed-point residual (the
/// discrete residual of `div a(w, Dw) = 0`); energies are absent.
pub fn solve_u_dependent_from(
    params: &IntegrandParams<f64>,
    mesh: &DiskMesh,
    init: DiscreteField,
    opts: &PicardOptions,
) -> Result<(DiscreteField, SolveLog)> {
    check_tol(opts.tol)?;
    let disc = Discretization::new(mesh)?;
    init.check(mesh)?;
    let mut w = init;
    let mut log = SolveLog::default();
    let mut history = Vec::new();
    // (G(x_j), G(x_j) - x_j) over the mixing window
    let mut past: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for outer in 0..=opts.max_outer {
        let frozen = disc.frozen_values(&Frozen::Field(w.clone()));
        let res = norm(&disc.coefficient_residual(params, &frozen, &w));
        log.rows.push(LogRow { iter: outer, energy: None, grad_norm: res, step: 0.0, cg_iters: 0 });
        history.push(res);
        if res <= opts.tol {
            return Ok((w, log));
        }
        if outer >= opts.window && res > (1.0 - opts.min_reduction) * history[outer - opts.window] {
            return Err(Error::convergence(
                format!("Picard stagnated at residual {res:.3e} after {outer} outer iterations"),
                log,
            ));
        }
        if outer == opts.max_outer {
            break;
        }
        let inner_tol = (0.01 * res).max(0.1 * opts.tol);
        let (next, _, krylov) = match frozen_newton(&disc, params, &frozen, w.clone(), inner_tol, 100) {
            Ok(v) => v,
            Err(Error::Convergence { message, .. }) => return Err(Error::convergence(message, log)),
            Err(e) => return Err(e),
        };
        let x = disc.free_vector(&w);
        let g = disc.free_vector(&next);
        let f: Vec<f64> = g.iter().zip(&x).map(|(a, b)| a - b).collect();
        let mut mixed = g.clone();
        if opts.anderson > 0 {
            if !past.is_empty() {
                let df: Vec<Vec<f64>> = past
                    .iter()
                    .map(|(_, fj)| f.iter().zip(fj).map(|(a, b)| a - b).collect())
                    .collect();
                if let Some(gamma) = anderson_weights(&df, &f) {
                    for (gj, (g_old, _)) in gamma.iter().zip(&past) {
                        for i in 0..mixed.len() {
                            mixed[i] -= gj * (g[i] - g_old[i]);
                        }
                    }
                }
            }
            past.push((g.clone(), f));
            if past.len() > opts.anderson {
                past.remove(0);
            }
        }
        log.finish_row(1.0, krylov);
        w = if mixed.iter().all(|v| v.is_finite()) { disc.with_free(&w, &mixed) } else { next };
    }
    Err(Error::convergence(format!("Picard did not converge in {} outer iterations", opts.max_outer), log))
}
