//! `(m, s)` phase-transition grids of convex recovery.

use std::time::Instant;

use multireg_core::linalg::derive_seed;
use multireg_core::measurement::GaussianMeasurementMap;
use multireg_core::signals::{sample_rank1_tensor, sample_sparse_lowrank};
use multireg_core::solver::{solve_recovery, SolveStatus};
use multireg_core::{DenseTensor, Field, Scalar};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Model, PhaseGridConfig, SuccessDenominator};
use crate::error::{ExpError, Result};
use crate::greedy::greedy_weights_recover;
use crate::logistic::{fit_logistic, LogisticFit};
use crate::manifest::RunManifest;

pub const SEED_SCHEME: &str =
    "signal = derive_seed(seed, [0, param_index, trial]); map = derive_seed(seed, [1, param_index, trial]), rows nested across m";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinResult {
    pub m: usize,
    /// Sparsity or local dimension.
    pub param: usize,
    pub trials: usize,
    pub successes: usize,
    /// Mean relative error over the trials the solver finished.
    pub mean_rel_err: f64,
    pub mean_iters: f64,
    /// Trials whose solver errored; they count as failures.
    pub solver_failures: usize,
}

impl BinResult {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// One line of the phase CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub m: usize,
    pub s: usize,
    pub trials: usize,
    pub successes: usize,
    pub mean_rel_err: f64,
    pub mean_iters: f64,
}

impl From<&BinResult> for PhaseRow {
    fn from(b: &BinResult) -> Self {
        Self {
            m: b.m,
            s: b.param,
            trials: b.trials,
            successes: b.successes,
            mean_rel_err: b.mean_rel_err,
            mean_iters: b.mean_iters,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PhaseRun {
    pub bins: Vec<BinResult>,
    pub manifest: RunManifest,
}

impl PhaseRun {
    pub fn rows(&self) -> Vec<PhaseRow> {
        self.bins.iter().map(PhaseRow::from).collect()
    }

    pub fn solver_failures(&self) -> usize {
        self.bins.iter().map(|b| b.solver_failures).sum()
    }

    pub fn attempts(&self) -> usize {
        self.bins.iter().map(|b| b.trials).sum()
    }

    /// Errors when the share of solver failures exceeds the config budget.
    pub fn check_budget(&self, budget: f64) -> Result<()> {
        let (failures, attempts) = (self.solver_failures(), self.attempts());
        if failures as f64 > budget * attempts as f64 {
            return Err(ExpError::FailureBudget { failures, attempts, budget });
        }
        Ok(())
    }

    /// Logistic fit of success against `m` for one secondary parameter.
    pub fn fit(&self, param: usize) -> Option<LogisticFit> {
        let points: Vec<_> = self
            .bins
            .iter()
            .filter(|b| b.param == param)
            .map(|b| (b.m as f64, b.successes, b.trials))
            .collect();
        fit_logistic(&points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub rel_err: Option<f64>,
    pub iterations: usize,
    pub success: bool,
}

pub fn run_phase_transition(cfg: &PhaseGridConfig) -> Result<PhaseRun> {
    cfg.validate()?;
    let started = Instant::now();
    let models: Vec<Model> = cfg
        .secondary_values
        .iter()
        .map(|&p| cfg.model.at(p, cfg.field))
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize, usize)> = (0..models.len())
        .flat_map(|pi| {
            (0..cfg.m_values.len()).flat_map(move |mi| (0..cfg.trials).map(move |t| (pi, mi, t)))
        })
        .collect();
    let outcomes: Vec<TrialOutcome> = jobs
        .par_iter()
        .map(|&(pi, mi, t)| run_trial(cfg, &models[pi], pi, cfg.m_values[mi], t))
        .collect();

    let bins: Vec<BinResult> = outcomes
        .chunks(cfg.trials)
        .zip(jobs.chunks(cfg.trials))
        .map(|(trials, job)| {
            let (pi, mi, _) = job[0];
            aggregate(cfg.m_values[mi], cfg.secondary_values[pi], trials)
        })
        .collect();

    let mut manifest = RunManifest::new(
        if cfg.greedy.is_some() { "greedy" } else { "phase" },
        cfg,
        cfg.seed,
        SEED_SCHEME,
        &cfg.solver,
        started,
    )?;
    manifest.solver_failures = bins.iter().map(|b| b.solver_failures).sum();
    Ok(PhaseRun { bins, manifest })
}

fn aggregate(m: usize, param: usize, trials: &[TrialOutcome]) -> BinResult {
    let errs: Vec<f64> = trials.iter().filter_map(|t| t.rel_err).collect();
    let finished = errs.len();
    BinResult {
        m,
        param,
        trials: trials.len(),
        successes: trials.iter().filter(|t| t.success).count(),
        mean_rel_err: if finished > 0 { errs.iter().sum::<f64>() / finished as f64 } else { f64::NAN },
        mean_iters: trials.iter().map(|t| t.iterations as f64).sum::<f64>() / trials.len() as f64,
        solver_failures: trials.len() - finished,
    }
}

/// Runs trial `trial` of bin `(m, param_index)`.
pub fn run_trial(
    cfg: &PhaseGridConfig,
    model: &Model,
    param_index: usize,
    m: usize,
    trial: usize,
) -> TrialOutcome {
    let result = match cfg.field {
        Field::Real => trial_in::<f64>(cfg, model, param_index, m, trial),
        Field::Complex => trial_in::<Complex64>(cfg, model, param_index, m, trial),
    };
    match result {
        Ok((rel_err, iterations)) => TrialOutcome {
            rel_err: Some(rel_err),
            iterations,
            success: rel_err <= cfg.threshold,
        },
        Err(_) => TrialOutcome { rel_err: None, iterations: 0, success: false },
    }
}

/// Signal of trial `trial` at secondary parameter `param_index`; the same in
/// every `m` bin.
pub fn trial_signal<T: Scalar>(
    cfg: &PhaseGridConfig,
    model: &Model,
    param_index: usize,
    trial: usize,
) -> multireg_core::Result<DenseTensor<T>> {
    let seed = derive_seed(cfg.seed, &[0, param_index as u64, trial as u64]);
    match model {
        Model::SparseLowRank(sl) => sample_sparse_lowrank(sl, seed),
        Model::RankOneTensor(t) => sample_rank1_tensor(t, seed),
    }
}

fn trial_in<T: Scalar>(
    cfg: &PhaseGridConfig,
    model: &Model,
    param_index: usize,
    m: usize,
    trial: usize,
) -> multireg_core::Result<(f64, usize)> {
    let x0: DenseTensor<T> = trial_signal(cfg, model, param_index, trial)?;
    let map_seed = derive_seed(cfg.seed, &[1, param_index as u64, trial as u64]);
    let a = GaussianMeasurementMap::<T>::new(m, x0.shape(), map_seed)?;
    let y = a.apply(&x0)?;

    let (x, iterations) = match &cfg.greedy {
        Some(g) => {
            let atoms = cfg.regularizer.atoms(x0.shape())?;
            let out = greedy_weights_recover(&a, &y, &atoms, g, &cfg.solver)?;
            if out.reports.iter().any(|r| r.status == SolveStatus::NumericalFailure) {
                return Err(multireg_core::Error::NumericalFailure("greedy solve".into()));
            }
            (out.x, out.reports.iter().map(|r| r.iterations).sum())
        }
        None => {
            let reg = cfg.regularizer.resolve(&x0)?;
            let (x, report) = solve_recovery(&a, &y, &reg, &cfg.solver)?;
            if report.status == SolveStatus::NumericalFailure {
                return Err(multireg_core::Error::NumericalFailure("recovery solve".into()));
            }
            (x, report.iterations)
        }
    };
    let denominator = match cfg.success_denominator {
        SuccessDenominator::Recon => x.frobenius_norm(),
        SuccessDenominator::Signal => x0.frobenius_norm(),
    };
    let err = x.distance(&x0);
    let rel = if err == 0.0 { 0.0 } else { err / denominator };
    Ok((rel, iterations))
}
