//! Empirical restricted-isometry deviations of normalized Gaussian maps.

use std::time::Instant;

use multireg_core::linalg::derive_seed;
use multireg_core::measurement::GaussianMeasurementMap;
use multireg_core::signals::{empirical_rip_deviation, SparseLowRankModel};
use multireg_core::solver::SolverOptions;
use multireg_core::{Field, Scalar};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RipConfig;
use crate::error::Result;
use crate::manifest::RunManifest;

pub const SEED_SCHEME: &str =
    "map k = derive_seed(seed, [0, k]), rows nested across m; probes of map k = derive_seed(seed, [1, k])";

/// One line of the rip CSV; `samples` counts probes per map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipRow {
    pub m: usize,
    pub samples: usize,
    pub median_dev: f64,
    pub max_dev: f64,
}

#[derive(Debug, Clone)]
pub struct RipRun {
    pub rows: Vec<RipRow>,
    pub manifest: RunManifest,
}

pub fn run_rip_sweep(cfg: &RipConfig) -> Result<RipRun> {
    cfg.validate()?;
    let started = Instant::now();
    let model = SparseLowRankModel::new(cfg.n, cfg.n, cfg.r, cfg.s, cfg.s, cfg.field)?;
    let jobs: Vec<(usize, usize)> =
        cfg.m_values.iter().flat_map(|&m| (0..cfg.maps).map(move |k| (m, k))).collect();
    let devs: Vec<f64> = jobs
        .par_iter()
        .map(|&(m, k)| match cfg.field {
            Field::Real => deviation::<f64>(cfg, &model, m, k),
            Field::Complex => deviation::<Complex64>(cfg, &model, m, k),
        })
        .collect::<multireg_core::Result<_>>()?;
    let rows = cfg
        .m_values
        .iter()
        .zip(devs.chunks(cfg.maps))
        .map(|(&m, d)| RipRow { m, samples: cfg.samples, median_dev: median(d), max_dev: d.iter().copied().fold(0.0, f64::max) })
        .collect();
    let manifest = RunManifest::new("rip", cfg, cfg.seed, SEED_SCHEME, &SolverOptions::default(), started)?;
    Ok(RipRun { rows, manifest })
}

fn deviation<T: Scalar>(cfg: &RipConfig, model: &SparseLowRankModel, m: usize, k: usize) -> multireg_core::Result<f64> {
    let a = GaussianMeasurementMap::<T>::new(m, &model.shape(), derive_seed(cfg.seed, &[0, k as u64]))?;
    let a = a.scaled(1.0 / (m as f64).sqrt())?;
    empirical_rip_deviation(&a, model, cfg.samples, derive_seed(cfg.seed, &[1, k as u64]))
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}
