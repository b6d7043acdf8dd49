use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::failure::Failure;

/// Every tunable of every command. Fields left `None` fall back to the
/// config file, then to the command's default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub out: Option<PathBuf>,
    pub p: Option<f64>,
    pub p_grid: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub h: Option<f64>,
    pub origin_node: Option<bool>,
    pub solver: Option<String>,
    pub tol: Option<f64>,
    pub n_r: Option<usize>,
    pub n_theta: Option<usize>,
    pub gamma: Option<f64>,
    pub skip_origin_bumps: Option<bool>,
    pub skip_annulus_bumps: Option<bool>,
    pub strong_points: Option<usize>,
    pub strong_h: Option<f64>,
    pub field: Option<String>,
    pub mesh: Option<PathBuf>,
    pub center: Option<[f64; 2]>,
    pub quantity: Option<String>,
    pub radii: Option<Vec<f64>>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Missing(format!("config file {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Usage(format!("config file {}: {e}", path.display())))
    }

    /// Values set in `self` win over those in `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        overlay!(
            self, base, command, out, p, p_grid, samples, seed, h, origin_node, solver, tol, n_r, n_theta, gamma,
            skip_origin_bumps, skip_annulus_bumps, strong_points, strong_h, field, mesh, center, quantity, radii
        )
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }
}

pub const DEFAULT_P: f64 = 1.5;
pub const DEFAULT_H: f64 = 0.1;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_VERIFY_N_R: usize = 800;
pub const DEFAULT_VERIFY_N_THETA: usize = 64;
pub const DEFAULT_VERIFY_GAMMA: f64 = 4.0;
pub const DEFAULT_STRONG_POINTS: usize = 200;
pub const DEFAULT_STRONG_H: f64 = 1e-4;

impl RunConfig {
    /// Fill every field the command reads, so the serialized config
    /// reproduces the run on its own.
    pub fn resolved(mut self) -> RunConfig {
        use singell_core::audit::{DEFAULT_SAMPLES, DEFAULT_SEED};
        use singell_core::probes::ProbeOptions;
        let command = self.command.clone().unwrap_or_default();
        self.out.get_or_insert_with(|| PathBuf::from("out"));
        match command.as_str() {
            "audit" => {
                if self.p_grid.is_none() {
                    self.p.get_or_insert(DEFAULT_P);
                }
                self.samples.get_or_insert(DEFAULT_SAMPLES);
                self.seed.get_or_insert(DEFAULT_SEED);
            }
            "verify" => {
                self.p.get_or_insert(DEFAULT_P);
                self.n_r.get_or_insert(DEFAULT_VERIFY_N_R);
                self.n_theta.get_or_insert(DEFAULT_VERIFY_N_THETA);
                self.gamma.get_or_insert(DEFAULT_VERIFY_GAMMA);
                self.skip_origin_bumps.get_or_insert(false);
                self.skip_annulus_bumps.get_or_insert(false);
                self.strong_points.get_or_insert(DEFAULT_STRONG_POINTS);
                self.strong_h.get_or_insert(DEFAULT_STRONG_H);
                self.seed.get_or_insert(DEFAULT_SEED);
            }
            "minimize" => {
                self.p.get_or_insert(DEFAULT_P);
                self.h.get_or_insert(DEFAULT_H);
                self.tol.get_or_insert(DEFAULT_TOL);
                self.solver.get_or_insert_with(|| "newton".into());
                self.origin_node.get_or_insert(true);
            }
            "probe" => {
                let p = *self.p.get_or_insert(DEFAULT_P);
                let opts = ProbeOptions::new(p);
                self.field.get_or_insert_with(|| "singular".into());
                self.center.get_or_insert([0.0, 0.0]);
                self.quantity.get_or_insert_with(|| "all".into());
                self.n_r.get_or_insert(opts.n_r);
                self.n_theta.get_or_insert(opts.n_theta);
                self.gamma.get_or_insert(opts.gamma);
            }
            _ => {}
        }
        self
    }
}

pub fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([a.parse().map_err(|e| format!("{a}: {e}"))?, b.parse().map_err(|e| format!("{b}: {e}"))?]),
        _ => Err(format!("expected two comma-separated numbers, got {s:?}")),
    }
}
