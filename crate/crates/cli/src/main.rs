//! `singular-elliptic`: audits, verification, FEM solves and decay probes for
//! the planar system whose weak solution is `x / |x|`.
//!
//! Exit codes: 0 success, 2 a check failed, 3 a solver failed, 64 bad usage,
//! 66 missing input, 70 output or internal failure.

mod commands;
mod config;
mod failure;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Out;
use config::{parse_pair, RunConfig};
use failure::Failure;

#[derive(Parser, Debug)]
#[command(name = "singular-elliptic", version, about = "Subquadratic elliptic systems with a discontinuous weak solution")]
struct Cli {
    /// TOML file with any of the command flags (snake_case keys); flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the structure conditions of the integrand and the coefficients.
    Audit(AuditArgs),
    /// Check that x/|x| solves the system: weak, strong and p-harmonic residuals.
    Verify(VerifyArgs),
    /// Minimize the energy (or run the Picard solver) on a disk mesh.
    Minimize(MinimizeArgs),
    /// Measure decay and oscillation of a field on shrinking balls.
    Probe(ProbeArgs),
    /// Summarize the outputs already present in the output directory.
    Report,
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[arg(long)]
    p: Option<f64>,
    /// Increasing exponents in (1, 2), comma separated.
    #[arg(long, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    n_r: Option<usize>,
    #[arg(long)]
    n_theta: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Drop the test functions whose support contains the origin.
    #[arg(long)]
    skip_origin_bumps: bool,
    /// Drop the test functions supported in annuli.
    #[arg(long)]
    skip_annulus_bumps: bool,
    #[arg(long)]
    strong_points: Option<usize>,
    #[arg(long)]
    strong_h: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct MinimizeArgs {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// newton (convex energy) or picard (u-dependent system).
    #[arg(long)]
    solver: Option<String>,
    /// Mesh without a node at the origin.
    #[arg(long)]
    no_origin_node: bool,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    /// "singular" or the path of a saved field (mesh.txt is read from the same directory).
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Ball centre as x,y.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    center: Option<[f64; 2]>,
    /// morrey, excess, oscillation or all.
    #[arg(long)]
    quantity: Option<String>,
    /// Strictly decreasing radii, comma separated.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    n_r: Option<usize>,
    #[arg(long)]
    n_theta: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
}

fn flag(set: bool) -> Option<bool> {
    set.then_some(true)
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Audit(_) => "audit",
            Command::Verify(_) => "verify",
            Command::Minimize(_) => "minimize",
            Command::Probe(_) => "probe",
            Command::Report => "report",
        }
    }

    fn flags(&self) -> RunConfig {
        let base = RunConfig::default();
        match self {
            Command::Audit(a) => RunConfig { p: a.p, p_grid: a.p_grid.clone(), samples: a.samples, seed: a.seed, ..base },
            Command::Verify(a) => RunConfig {
                p: a.p,
                n_r: a.n_r,
                n_theta: a.n_theta,
                gamma: a.gamma,
                skip_origin_bumps: flag(a.skip_origin_bumps),
                skip_annulus_bumps: flag(a.skip_annulus_bumps),
                strong_points: a.strong_points,
                strong_h: a.strong_h,
                seed: a.seed,
                ..base
            },
            Command::Minimize(a) => RunConfig {
                p: a.p,
                h: a.h,
                tol: a.tol,
                solver: a.solver.clone(),
                origin_node: a.no_origin_node.then_some(false),
                ..base
            },
            Command::Probe(a) => RunConfig {
                field: a.field.clone(),
                mesh: a.mesh.clone(),
                center: a.center,
                quantity: a.quantity.clone(),
                radii: a.radii.clone(),
                p: a.p,
                n_r: a.n_r,
                n_theta: a.n_theta,
                gamma: a.gamma,
                ..base
            },
            Command::Report => base,
        }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("SINGELL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Usage(format!("SINGELL_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Internal(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_threads()?;
    let file = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut cfg = RunConfig { out: cli.out.clone(), ..cli.command.flags() }.over(file);
    cfg.command = Some(cli.command.name().to_string());
    let cfg = cfg.resolved();
    let out = Out::create(cfg.out.as_deref().expect("resolved config has an output directory"))?;
    if let Command::Report = cli.command {
        return report::report(&out);
    }
    out.write("config.toml", &cfg.to_toml())?;
    match cli.command {
        Command::Audit(_) => commands::audit(&cfg, &out),
        Command::Verify(_) => commands::verify(&cfg, &out),
        Command::Minimize(_) => commands::minimize(&cfg, &out),
        Command::Probe(_) => commands::probe_cmd(&cfg, &out),
        Command::Report => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(64) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit()
        }
    }
}
