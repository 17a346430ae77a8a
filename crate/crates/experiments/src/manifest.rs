use std::path::Path;
use std::time::Instant;

use multireg_core::solver::SolverOptions;
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to rerun an experiment. Feeding the manifest back via
/// `--config` reproduces the CSV output bit for bit; only
/// `wall_clock_seconds` changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub seed: u64,
    /// How per-trial seeds derive from `seed`.
    pub seed_scheme: String,
    pub solver: SolverOptions,
    pub solver_failures: usize,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new<C: Serialize>(
        command: &str,
        config: &C,
        seed: u64,
        seed_scheme: &str,
        solver: &SolverOptions,
        started: Instant,
    ) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            version: VERSION.to_string(),
            config: serde_json::to_value(config)?,
            seed,
            seed_scheme: seed_scheme.to_string(),
            solver: solver.clone(),
            solver_failures: 0,
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}
