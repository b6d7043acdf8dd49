use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use singell_core::audit::{
    audit_coefficients, audit_integrand, ratio_csv, tail_increasing, AuditReport, RatioRow, SampleCloud, DEFAULT_SAMPLES,
    DEFAULT_SEED,
};
use singell_core::fem::{
    energy, mesh_disk, minimize_from, solve_u_dependent_from, DiscreteField, Discretization, DiskMesh, NewtonOptions,
    PicardOptions,
};
use singell_core::probes::{default_radii, mesh_radii, probe, FieldSampler, P1Field, ProbeOptions, Quantity, SingularField};
use singell_core::quadrature::{build_rule, default_family, FluxKind, WeakForm};
use singell_core::singular::{
    du_sing, p_harmonic_residual, singular_flux, strong_divergence_residual, w1p_seminorm_sing,
};
use singell_core::{make_params, Error, Vec2};

use crate::config::*;
use crate::failure::Failure;

pub struct Out {
    pub dir: PathBuf,
}

impl Out {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Internal(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Out { dir: dir.to_path_buf() })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display())))
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn check_p(p: f64) -> Result<f64, Failure> {
    if p > 1.0 && p < 2.0 {
        Ok(p)
    } else {
        Err(usage(format!("p must lie in (1, 2), got {p}")))
    }
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("{name} must be positive, got {v}")))
    }
}

fn pass_label(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn audit(cfg: &RunConfig, out: &Out) -> Result<(), Failure> {
    let grid = match (&cfg.p_grid, cfg.p) {
        (Some(grid), _) => grid.clone(),
        (None, Some(p)) => vec![p],
        (None, None) => vec![DEFAULT_P],
    };
    if grid.is_empty() {
        return Err(usage("p grid is empty"));
    }
    for &p in &grid {
        check_p(p)?;
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(usage("p grid must be strictly increasing"));
    }
    let samples = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    if samples == 0 {
        return Err(usage("samples must be at least 1"));
    }
    let cloud = SampleCloud::new(samples, cfg.seed.unwrap_or(DEFAULT_SEED))?;

    let mut reports: Vec<AuditReport> = Vec::new();
    let mut curve = Vec::new();
    for &p in &grid {
        let params = make_params(p)?;
        let integrand = audit_integrand(&params, &cloud)?;
        let coefficients = audit_coefficients(&params, &cloud)?;
        curve.push(RatioRow {
            p,
            m_g: params.m_g,
            nu_hat: coefficients.nu_hat,
            l_hat: coefficients.l_hat,
            ratio: coefficients.ratio(),
        });
        reports.push(integrand);
        reports.push(coefficients);
    }

    let mut csv = format!("{}\n", AuditReport::CSV_HEADER);
    let mut summary = String::new();
    for r in &reports {
        csv.push_str(&r.csv_rows());
        summary.push_str(&r.summary());
        summary.push('\n');
    }
    let tail_ok = grid.len() < 3 || tail_increasing(&curve);
    if grid.len() >= 3 {
        writeln!(summary, "ratio tail increasing over the last 3 grid points: {}", pass_label(tail_ok)).unwrap();
    }
    out.write("audit.csv", &csv)?;
    out.write("ratio_curve.csv", &ratio_csv(&curve))?;
    out.write("summary.txt", &summary)?;

    let mut failures = Vec::new();
    for r in &reports {
        for row in r.failures() {
            let sample = cloud.samples.get(row.worst_sample);
            failures.push(format!("{} p={} {} violated at sample {}: {:?}", r.target, r.p, row.condition, row.worst_sample, sample));
        }
    }
    if !tail_ok {
        failures.push("ratio L/nu is not increasing on the tail of the grid".into());
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failures.join("\n")))
    }
}

pub fn verify(cfg: &RunConfig, out: &Out) -> Result<(), Failure> {
    let p = check_p(cfg.p.unwrap_or(DEFAULT_P))?;
    let n_r = cfg.n_r.unwrap_or(DEFAULT_VERIFY_N_R);
    let n_theta = cfg.n_theta.unwrap_or(DEFAULT_VERIFY_N_THETA);
    let gamma = cfg.gamma.unwrap_or(DEFAULT_VERIFY_GAMMA);
    let points = cfg.strong_points.unwrap_or(DEFAULT_STRONG_POINTS);
    let strong_h = positive("strong_h", cfg.strong_h.unwrap_or(DEFAULT_STRONG_H))?;
    const MIN_RADIUS: f64 = 0.05;
    if strong_h >= MIN_RADIUS / 4.0 {
        return Err(usage(format!("strong_h must be below {} so stencils avoid the origin", MIN_RADIUS / 4.0)));
    }
    let family: Vec<_> = default_family(true)
        .into_iter()
        .filter(|phi| {
            if phi.covers_origin() {
                !cfg.skip_origin_bumps.unwrap_or(false)
            } else {
                !cfg.skip_annulus_bumps.unwrap_or(false)
            }
        })
        .collect();
    if family.is_empty() {
        return Err(usage("test family is empty"));
    }
    let params = make_params(p)?;
    let rule = build_rule(n_r, n_theta, gamma)?;
    let mut ok = true;

    let exact = w1p_seminorm_sing(p)?;
    let approx = rule.try_integrate(|x| Ok(du_sing(x)?.frobenius().powf(p)))?;
    let semi_err = (approx - exact).abs() / exact;
    let semi_ok = semi_err <= 1e-6;
    ok &= semi_ok;
    out.write(
        "seminorm.csv",
        &format!("p,quadrature,exact,relative_error,tolerance,pass\n{p:.16e},{approx:.16e},{exact:.16e},{semi_err:.16e},{:.16e},{semi_ok}\n", 1e-6),
    )?;

    let coeff = WeakForm::new(&params, &rule, FluxKind::Coefficients)?;
    let el = WeakForm::new(&params, &rule, FluxKind::EulerLagrange)?;
    let el_scale = p * params.m_g;
    let mut weak = String::from("function,covers_origin,residual,residual_el_scaled,grad_sup,tolerance,pass\n");
    for phi in &family {
        let (a, b) = (coeff.residual(phi), el.residual(phi) / el_scale);
        let sup = phi.grad_sup();
        let tol = if phi.covers_origin() { 1e-5 } else { 1e-8 };
        let pass = a.abs() <= tol * sup && b.abs() <= tol * sup;
        ok &= pass;
        writeln!(weak, "{},{},{a:.16e},{b:.16e},{sup:.16e},{tol:.16e},{pass}", phi.label(), phi.covers_origin()).unwrap();
    }
    out.write("weak_residuals.csv", &weak)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(DEFAULT_SEED));
    let mut strong = String::from("x,y,residual,bound,pass\n");
    let mut taken = 0;
    while taken < points {
        let x = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if !(x.norm() >= MIN_RADIUS && x.norm() < 1.0) {
            continue;
        }
        let res = strong_divergence_residual(&params, &x, strong_h)?.norm();
        let bound = 1e-5 * singular_flux(&params, &x)?.frobenius() / x.norm();
        let pass = res <= bound;
        ok &= pass;
        writeln!(strong, "{:.16e},{:.16e},{res:.16e},{bound:.16e},{pass}", x.x(), x.y()).unwrap();
        taken += 1;
    }
    out.write("strong_residuals.csv", &strong)?;

    let mut harmonic = String::from("function,lhs,rhs,residual,scale,pass\n");
    for phi in &family {
        let r = p_harmonic_residual(p, &rule, phi)?;
        let pass = r.residual.abs() <= 1e-6 * r.scale();
        ok &= pass;
        writeln!(harmonic, "{},{:.16e},{:.16e},{:.16e},{:.16e},{pass}", phi.label(), r.lhs, r.rhs, r.residual, r.scale()).unwrap();
    }
    out.write("p_harmonic.csv", &harmonic)?;

    if ok {
        Ok(())
    } else {
        Err(Failure::Check("residual bounds exceeded; see the pass columns of the verify CSVs".into()))
    }
}

pub fn minimize(cfg: &RunConfig, out: &Out) -> Result<(), Failure> {
    let p = check_p(cfg.p.unwrap_or(DEFAULT_P))?;
    let h = cfg.h.unwrap_or(DEFAULT_H);
    if !(h > 0.0 && h < 0.5) {
        return Err(usage(format!("h must lie in (0, 0.5), got {h}")));
    }
    let tol = positive("tol", cfg.tol.unwrap_or(DEFAULT_TOL))?;
    let solver = cfg.solver.clone().unwrap_or_else(|| "newton".into());
    if solver != "newton" && solver != "picard" {
        return Err(usage(format!("unknown solver '{solver}' (newton, picard)")));
    }
    let params = make_params(p)?;
    let mesh = mesh_disk(h, cfg.origin_node.unwrap_or(true))?;
    out.write("mesh.txt", &mesh.to_text())?;
    let start = DiscreteField::singular_interpolant(&mesh);
    let result = if solver == "newton" {
        minimize_from(&params, &mesh, start.clone(), &NewtonOptions::new(tol))
    } else {
        solve_u_dependent_from(&params, &mesh, start.clone(), &PicardOptions::new(tol))
    };
    let (field, log) = match result {
        Ok(v) => v,
        Err(Error::Convergence { message, log }) => {
            out.write("solve_log.csv", &log.to_csv())?;
            return Err(Failure::Solver(message));
        }
        Err(e) => return Err(e.into()),
    };
    out.write("field.txt", &field.to_text())?;
    out.write("solve_log.csv", &log.to_csv())?;

    let disc = Discretization::new(&mesh)?;
    let mut s = String::new();
    writeln!(s, "solver = {solver}").unwrap();
    writeln!(s, "nodes = {}", mesh.nodes.len()).unwrap();
    writeln!(s, "triangles = {}", mesh.triangles.len()).unwrap();
    writeln!(s, "longest_edge = {:.16e}", mesh.h).unwrap();
    writeln!(s, "iterations = {}", log.last().map(|r| r.iter).unwrap_or(0)).unwrap();
    writeln!(s, "interpolant_energy = {:.16e}", energy(&params, &mesh, &start)?).unwrap();
    writeln!(s, "final_energy = {:.16e}", energy(&params, &mesh, &field)?).unwrap();
    writeln!(s, "fixed_point_residual = {:.16e}", disc.fixed_point_residual(&params, &field)?).unwrap();
    writeln!(s, "v_distance_to_singular = {:.16e}", disc.v_distance(&field, p)?).unwrap();
    out.write("minimize_summary.txt", &s)?;
    Ok(())
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Missing(format!("{}: {e}", path.display())))
}

pub fn probe_cmd(cfg: &RunConfig, out: &Out) -> Result<(), Failure> {
    let p = check_p(cfg.p.unwrap_or(DEFAULT_P))?;
    let center = cfg.center.map(|[x, y]| Vec2::new(x, y)).unwrap_or(Vec2::zero());
    let quantities = match cfg.quantity.as_deref().unwrap_or("all") {
        "all" => vec![Quantity::Morrey, Quantity::Excess, Quantity::Oscillation],
        q => vec![Quantity::parse(q)?],
    };
    let mut opts = ProbeOptions::new(p);
    opts.n_r = cfg.n_r.unwrap_or(opts.n_r);
    opts.n_theta = cfg.n_theta.unwrap_or(opts.n_theta);
    opts.gamma = cfg.gamma.unwrap_or(opts.gamma);
    let field_arg = cfg.field.clone().unwrap_or_else(|| "singular".into());

    let loaded: Option<(DiskMesh, DiscreteField)> = if field_arg == "singular" {
        None
    } else {
        let field_path = PathBuf::from(&field_arg);
        let mesh_path = cfg.mesh.clone().unwrap_or_else(|| field_path.with_file_name("mesh.txt"));
        let field = DiscreteField::from_text(&read_input(&field_path)?)?;
        let mesh = DiskMesh::from_text(&read_input(&mesh_path)?)?;
        field.check(&mesh)?;
        Some((mesh, field))
    };
    let p1 = match &loaded {
        Some((mesh, field)) => Some(P1Field::new(mesh, field)?),
        None => None,
    };
    let sampler: &dyn FieldSampler = match &p1 {
        Some(f) => f,
        None => &SingularField,
    };
    let radii = match (&cfg.radii, &loaded) {
        (Some(r), _) => r.clone(),
        (None, Some((mesh, _))) => mesh_radii(&center, mesh.h),
        (None, None) => default_radii(&center),
    };

    let mut summary = String::new();
    writeln!(summary, "field = {field_arg}").unwrap();
    for q in quantities {
        let table = probe(q, sampler, &center, &radii, &opts)?;
        out.write(&format!("decay_{}.csv", q.name()), &table.to_csv())?;
        summary.push_str(&table.summary());
    }
    out.write("probe_summary.txt", &summary)?;
    Ok(())
}
