//! Statistical-dimension sweeps over signal sizes and regularizer families.

use std::time::Instant;

use multireg_core::linalg::derive_seed;
use multireg_core::regularizers::{AtomKind, CombineMode, RegularizerSpec, WeightSpec};
use multireg_core::signals::{sample_rank1_tensor, sample_sparse_lowrank, RankOneTensorModel, SparseLowRankModel};
use multireg_core::statdim::{estimate_statdim, StatDimEstimate};
use multireg_core::{BipartitionSet, DenseTensor, Field};
use serde::{Deserialize, Serialize};

use crate::config::{SweepConfig, SweepSignal};
use crate::error::Result;
use crate::manifest::RunManifest;

pub const SEED_SCHEME: &str =
    "signal = derive_seed(seed, [0, n, s]); gaussians = derive_seed(seed, [1, n, s]), shared by all families";

/// One line of the statdim CSV. `s` and `r` are empty for tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatdimRow {
    pub family: String,
    pub n: usize,
    pub s: Option<usize>,
    pub r: Option<usize>,
    #[serde(rename = "N")]
    pub samples: usize,
    pub mean: f64,
    pub stderr: f64,
    pub failures: usize,
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub rows: Vec<StatdimRow>,
    pub estimates: Vec<StatDimEstimate>,
    pub manifest: RunManifest,
}

impl SweepRun {
    /// Estimates with more than 5% failed samples.
    pub fn invalid(&self) -> usize {
        self.estimates.iter().filter(|e| !e.valid).count()
    }

    pub fn find(&self, family: &str, n: usize, s: Option<usize>) -> Option<(&StatdimRow, &StatDimEstimate)> {
        self.rows
            .iter()
            .zip(&self.estimates)
            .find(|(r, _)| r.family == family && r.n == n && r.s == s)
    }
}

/// Regularizer of a named family, all weights `auto`. Sparse + low-rank
/// families: `sum`, `max`, `l1`, `nuc`. Tensor families: `tt`, `hosvd`,
/// `b2`, `b3`, `square-deal`, each the optimally weighted max of the nuclear
/// norms of its matricizations. Anything else is parsed as a spec.
pub fn family_spec(name: &str, order: usize) -> Result<RegularizerSpec> {
    let spec = match name.to_ascii_lowercase().as_str() {
        "sum" => "sum(l1, nuc)".parse()?,
        "max" => "max(l1, nuc)".parse()?,
        "l1" => "sum(l1)".parse()?,
        "nuc" => "sum(nuc)".parse()?,
        lower @ ("tt" | "hosvd" | "b2" | "b3" | "square-deal") => {
            let set = BipartitionSet::named(lower, order)?;
            RegularizerSpec {
                mode: CombineMode::Max,
                terms: set.iter().map(|b| (AtomKind::Nuclear(b.clone()), WeightSpec::Auto)).collect(),
            }
        }
        _ => RegularizerSpec::parse(name)?,
    };
    Ok(spec)
}

/// Signal of configuration `(n, s)`; `s` is ignored for tensors.
pub fn sweep_signal(cfg: &SweepConfig, n: usize, s: usize) -> Result<DenseTensor<f64>> {
    let seed = derive_seed(cfg.seed, &[0, n as u64, s as u64]);
    Ok(match &cfg.signal {
        SweepSignal::SparseLowRank { r, .. } => {
            let model = SparseLowRankModel::new(n, n, *r, s, s, Field::Real)?;
            sample_sparse_lowrank(&model, seed)?
        }
        SweepSignal::RankOneTensor { order } => {
            let model = RankOneTensorModel::new(vec![n; *order], Field::Real)?;
            sample_rank1_tensor(&model, seed)?
        }
    })
}

pub fn run_statdim_sweep(cfg: &SweepConfig) -> Result<SweepRun> {
    cfg.validate()?;
    let started = Instant::now();
    let (s_values, r, order) = match &cfg.signal {
        SweepSignal::SparseLowRank { r, s_values } => (s_values.iter().map(|&s| Some(s)).collect(), Some(*r), 2),
        SweepSignal::RankOneTensor { order } => (vec![None], None, *order),
    };
    let specs: Vec<RegularizerSpec> =
        cfg.families.iter().map(|f| family_spec(f, order)).collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut estimates = Vec::new();
    for &n in &cfg.n_values {
        for &s in &s_values {
            let s_key = s.unwrap_or(0);
            let x0 = sweep_signal(cfg, n, s_key)?;
            let seed = derive_seed(cfg.seed, &[1, n as u64, s_key as u64]);
            for (family, spec) in cfg.families.iter().zip(&specs) {
                let reg = spec.resolve(&x0)?;
                let est = estimate_statdim(&x0, &reg, cfg.samples, seed, &cfg.solver)?;
                rows.push(StatdimRow {
                    family: family.clone(),
                    n,
                    s,
                    r,
                    samples: est.samples,
                    mean: est.mean,
                    stderr: est.stderr,
                    failures: est.failures,
                });
                estimates.push(est);
            }
        }
    }
    let mut manifest = RunManifest::new("statdim", cfg, cfg.seed, SEED_SCHEME, &cfg.solver, started)?;
    manifest.solver_failures = estimates.iter().map(|e| e.failures).sum();
    Ok(SweepRun { rows, estimates, manifest })
}
