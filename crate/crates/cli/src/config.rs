//! Run configuration: a flat TOML file of key-value pairs with bracketed
//! lists, plus flag overrides.

use std::path::Path;

use fracdim_core::simulate::SimCaps;
use fracdim_core::Problem;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub ratios: Vec<f64>,
    pub probs: Vec<f64>,
    pub branching: u32,
    #[serde(default = "default_solver_tol")]
    pub solver_tol: f64,
    /// Simplex grid subdivisions for the oracle command; when omitted the
    /// per-alphabet default applies (1000 up to three maps, 200 at four).
    #[serde(default)]
    pub grid_resolution: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub caps: CapsConfig,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsConfig {
    #[serde(default = "default_stopping_cap")]
    pub stopping_set: usize,
    #[serde(default = "default_frontier_cap")]
    pub frontier: usize,
}

impl Default for CapsConfig {
    fn default() -> Self {
        Self {
            stopping_set: default_stopping_cap(),
            frontier: default_frontier_cap(),
        }
    }
}

fn default_solver_tol() -> f64 {
    1e-12
}

fn default_stopping_cap() -> usize {
    5_000_000
}

fn default_frontier_cap() -> usize {
    10_000_000
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        if !(config.solver_tol > 0.0 && config.solver_tol <= 1e-6) {
            return Err(CliError::validation(format!(
                "solver_tol must lie in (0, 1e-6], got {}",
                config.solver_tol
            )));
        }
        Ok(config)
    }

    pub fn caps(&self) -> SimCaps {
        SimCaps {
            stopping_set: self.caps.stopping_set,
            frontier: self.caps.frontier,
        }
    }

    /// Builds the validated problem, optionally removing zero-probability
    /// maps (with renormalization) first. Pruning changes the number of
    /// maps, which is why the library itself refuses silent zeros.
    pub fn problem(&self, prune_zeros: bool) -> CliResult<Problem> {
        let (ratios, probs) = if prune_zeros {
            let kept: Vec<(f64, f64)> = self
                .ratios
                .iter()
                .zip(&self.probs)
                .filter(|&(_, &p)| p != 0.0)
                .map(|(&r, &p)| (r, p))
                .collect();
            let total: f64 = kept.iter().map(|&(_, p)| p).sum();
            if total <= 0.0 {
                return Err(CliError::validation(
                    "all probabilities are zero after pruning",
                ));
            }
            (
                kept.iter().map(|&(r, _)| r).collect::<Vec<_>>(),
                kept.iter().map(|&(_, p)| p / total).collect::<Vec<_>>(),
            )
        } else {
            (self.ratios.clone(), self.probs.clone())
        };
        Problem::validate(&ratios, &probs, self.branching).map_err(CliError::from)
    }
}
