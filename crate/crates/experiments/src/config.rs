//! Experiment configurations. Every config is plain JSON with the field names
//! below; omitted fields take their defaults.

use std::path::Path;

use multireg_core::regularizers::RegularizerSpec;
use multireg_core::signals::{RankOneTensorModel, SparseLowRankModel};
use multireg_core::solver::SolverOptions;
use multireg_core::Field;
use serde::{Deserialize, Serialize};

use crate::error::{ExpError, Result};

/// Signal family of a phase grid. The secondary grid parameter is the
/// sparsity `s = s₁ = s₂` for sparse low-rank matrices and the local
/// dimension `n` for rank-one tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelFamily {
    SparseLowRank { n1: usize, n2: usize, r: usize },
    RankOneTensor { order: usize },
}

/// Concrete signal model at one value of the secondary parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    SparseLowRank(SparseLowRankModel),
    RankOneTensor(RankOneTensorModel),
}

impl Model {
    pub fn shape(&self) -> Vec<usize> {
        match self {
            Model::SparseLowRank(m) => m.shape().to_vec(),
            Model::RankOneTensor(m) => m.dims.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.shape().iter().product()
    }
}

impl ModelFamily {
    pub fn at(&self, param: usize, field: Field) -> Result<Model> {
        Ok(match *self {
            ModelFamily::SparseLowRank { n1, n2, r } => {
                Model::SparseLowRank(SparseLowRankModel::new(n1, n2, r, param, param, field)?)
            }
            ModelFamily::RankOneTensor { order } => {
                Model::RankOneTensor(RankOneTensorModel::new(vec![param; order], field)?)
            }
        })
    }
}

/// Denominator of the relative-error success test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SuccessDenominator {
    /// `‖X̂ − X₀‖ / ‖X̂‖`.
    #[default]
    Recon,
    /// `‖X̂ − X₀‖ / ‖X₀‖`.
    Signal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyConfig {
    #[serde(default = "default_greedy_iterations")]
    pub iterations: usize,
    /// Pair each weight with its own atom's dual norm instead of the other's.
    #[serde(default)]
    pub swap_init: bool,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        Self { iterations: default_greedy_iterations(), swap_init: false }
    }
}

fn default_greedy_iterations() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGridConfig {
    pub model: ModelFamily,
    /// Weights left at `auto` are set to `1/‖X₀‖₍ᵢ₎` per trial signal.
    pub regularizer: RegularizerSpec,
    pub m_values: Vec<usize>,
    /// Sparsities (matrices) or local dimensions (tensors).
    pub secondary_values: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_recovery_field")]
    pub field: Field,
    #[serde(default)]
    pub success_denominator: SuccessDenominator,
    /// Tune the weights of a two-atom sum greedily instead of using `auto`.
    #[serde(default)]
    pub greedy: Option<GreedyConfig>,
    #[serde(default = "SolverOptions::recovery")]
    pub solver: SolverOptions,
    /// Largest tolerated share of trials whose solver errored.
    #[serde(default = "default_failure_budget")]
    pub max_failure_rate: f64,
}

fn default_trials() -> usize {
    10
}

fn default_threshold() -> f64 {
    1e-5
}

fn default_recovery_field() -> Field {
    Field::Complex
}

fn default_failure_budget() -> f64 {
    0.05
}

impl PhaseGridConfig {
    /// Sparse rank-one `n × n` grid with `trials` runs per bin.
    pub fn sparse_lowrank(
        n: usize,
        regularizer: RegularizerSpec,
        m_values: Vec<usize>,
        s_values: Vec<usize>,
        trials: usize,
    ) -> Self {
        Self {
            model: ModelFamily::SparseLowRank { n1: n, n2: n, r: 1 },
            regularizer,
            m_values,
            secondary_values: s_values,
            trials,
            threshold: default_threshold(),
            seed: 0,
            field: default_recovery_field(),
            success_denominator: SuccessDenominator::Recon,
            greedy: None,
            solver: SolverOptions::recovery(),
            max_failure_rate: default_failure_budget(),
        }
    }

    /// Desk-scale sparse + low-rank grid: `n = 20`, 10 trials per bin.
    pub fn desk_scale(regularizer: RegularizerSpec) -> Self {
        Self::sparse_lowrank(
            20,
            regularizer,
            (1..=15).map(|k| 20 * k).collect(),
            vec![2, 4, 6, 8, 10],
            10,
        )
    }

    /// The full grid: `n = 30`, `s = 5..=20`, 20 trials per bin.
    pub fn paper_scale(regularizer: RegularizerSpec) -> Self {
        Self::sparse_lowrank(
            30,
            regularizer,
            (1..=50).map(|k| 10 * k).collect(),
            (5..=20).collect(),
            20,
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = from_config_or_manifest(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(ExpError::Config("trials must be at least 1".into()));
        }
        if !(self.threshold > 0.0) {
            return Err(ExpError::Config(format!("threshold must be positive, got {}", self.threshold)));
        }
        if self.m_values.is_empty() || self.secondary_values.is_empty() {
            return Err(ExpError::Config("m_values and secondary_values must be nonempty".into()));
        }
        if !(0.0..=1.0).contains(&self.max_failure_rate) {
            return Err(ExpError::Config("max_failure_rate must lie in [0, 1]".into()));
        }
        self.solver.validate()?;
        for &p in &self.secondary_values {
            let model = self.model.at(p, self.field)?;
            self.regularizer.atoms(&model.shape())?;
            if let Some(&m) = self.m_values.iter().find(|&&m| m > model.dim()) {
                return Err(ExpError::Config(format!(
                    "m = {m} exceeds the signal dimension {} at parameter {p}",
                    model.dim()
                )));
            }
        }
        if let Some(g) = &self.greedy {
            if g.iterations == 0 {
                return Err(ExpError::Config("greedy iterations must be at least 1".into()));
            }
            if self.regularizer.terms.len() != 2 {
                return Err(ExpError::Config("greedy weights need exactly two atoms".into()));
            }
        }
        Ok(())
    }
}

/// Signal family of a statistical-dimension sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepSignal {
    /// `n × n` matrices, `s₁ = s₂ = s` for each listed `s`.
    SparseLowRank { r: usize, s_values: Vec<usize> },
    /// Order-`order` rank-one tensors with all local dimensions `n`.
    RankOneTensor { order: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub signal: SweepSignal,
    /// Family names (`sum`, `max`, `l1`, `nuc`, `tt`, `hosvd`, `b2`, `b3`,
    /// `square-deal`) or explicit regularizer specs.
    pub families: Vec<String>,
    pub n_values: Vec<usize>,
    #[serde(default = "default_statdim_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "SolverOptions::distance")]
    pub solver: SolverOptions,
}

fn default_statdim_samples() -> usize {
    100
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: Self = from_config_or_manifest(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() || self.n_values.is_empty() {
            return Err(ExpError::Config("families and n_values must be nonempty".into()));
        }
        if self.samples < 2 {
            return Err(ExpError::Config("at least two samples are needed".into()));
        }
        if let SweepSignal::SparseLowRank { s_values, .. } = &self.signal {
            if s_values.is_empty() {
                return Err(ExpError::Config("s_values must be nonempty".into()));
            }
        }
        self.solver.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipConfig {
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub m_values: Vec<usize>,
    #[serde(default = "default_rip_maps")]
    pub maps: usize,
    #[serde(default = "default_rip_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub field: Field,
}

fn default_rip_maps() -> usize {
    10
}

fn default_rip_samples() -> usize {
    200
}

impl RipConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: Self = from_config_or_manifest(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        SparseLowRankModel::new(self.n, self.n, self.r, self.s, self.s, self.field)?;
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return Err(ExpError::Config("m_values must be nonempty and positive".into()));
        }
        if self.maps == 0 || self.samples == 0 {
            return Err(ExpError::Config("maps and samples must be positive".into()));
        }
        Ok(())
    }
}

/// Accepts either a bare config or a run manifest carrying it under `config`.
fn from_config_or_manifest<C: serde::de::DeserializeOwned>(text: &str) -> Result<C> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let inner = match value.get("config") {
        Some(c) if value.get("version").is_some() => c.clone(),
        _ => value,
    };
    serde_json::from_value(inner).map_err(|e| ExpError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> RegularizerSpec {
        "max(l1, nuc)".parse().unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let json = r#"{
            "model": {"kind": "sparse_low_rank", "n1": 8, "n2": 8, "r": 1},
            "regularizer": "sum(l1, nuc)",
            "m_values": [10, 20],
            "secondary_values": [2]
        }"#;
        let cfg: PhaseGridConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.trials, 10);
        assert_eq!(cfg.threshold, 1e-5);
        assert_eq!(cfg.field, Field::Complex);
        assert_eq!(cfg.success_denominator, SuccessDenominator::Recon);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn rejects_bad_grids() {
        let mut cfg = PhaseGridConfig::sparse_lowrank(6, spec(), vec![10], vec![2], 1);
        assert!(cfg.validate().is_ok());
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        cfg.trials = 1;
        cfg.m_values.clear();
        assert!(cfg.validate().is_err());
        cfg.m_values = vec![37];
        assert!(cfg.validate().is_err());
        cfg.m_values = vec![10];
        cfg.threshold = 0.0;
        assert!(cfg.validate().is_err());
        cfg.threshold = 1e-5;
        cfg.secondary_values = vec![7];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut cfg = PhaseGridConfig::desk_scale(spec());
        cfg.greedy = Some(GreedyConfig::default());
        let text = serde_json::to_string(&cfg).unwrap();
        let back: PhaseGridConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn reads_manifest_wrapper() {
        let cfg = PhaseGridConfig::desk_scale(spec());
        let wrapped = serde_json::json!({"version": "0.1.0", "config": cfg});
        let back: PhaseGridConfig = from_config_or_manifest(&wrapped.to_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn tensor_family() {
        let m = ModelFamily::RankOneTensor { order: 4 }.at(3, Field::Real).unwrap();
        assert_eq!(m.shape(), vec![3, 3, 3, 3]);
        assert_eq!(m.dim(), 81);
    }
}
