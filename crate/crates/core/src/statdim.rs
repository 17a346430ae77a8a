//! Monte-Carlo statistical dimensions of descent cones, `δ = E dist²(g, cone ∂R(x₀))`,
//! and closed-form distance oracles for single-atom cones.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{derive_seed, sample_gaussian, svd, DenseTensor};
use crate::regularizers::CompositeRegularizer;
use crate::solver::{solve_cone_distance, ConeDistanceProblem, SolverOptions};
use crate::{Error, Result};

/// Share of failed samples above which an estimate is flagged invalid.
pub const MAX_FAILURE_RATE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatDimEstimate {
    /// Mean of the squared distances over the successful samples.
    pub mean: f64,
    /// Unbiased sample standard deviation.
    pub std_dev: f64,
    pub stderr: f64,
    /// Requested sample count `N`.
    pub samples: usize,
    pub failures: usize,
    pub seed: u64,
    /// False when more than 5% of the samples failed.
    pub valid: bool,
    /// Per-sample squared distances, `None` for failed samples.
    #[serde(skip)]
    pub squared_distances: Vec<Option<f64>>,
}

impl StatDimEstimate {
    pub fn used(&self) -> usize {
        self.samples - self.failures
    }

    fn from_samples(squared_distances: Vec<Option<f64>>, seed: u64) -> Self {
        let ok: Vec<f64> = squared_distances.iter().flatten().copied().collect();
        let n = ok.len();
        let mean = if n > 0 { ok.iter().sum::<f64>() / n as f64 } else { f64::NAN };
        let std_dev = if n > 1 {
            (ok.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            f64::NAN
        };
        let samples = squared_distances.len();
        let failures = samples - n;
        Self {
            mean,
            std_dev,
            stderr: std_dev / (n as f64).sqrt(),
            samples,
            failures,
            seed,
            valid: n > 1 && failures as f64 <= MAX_FAILURE_RATE * samples as f64,
            squared_distances,
        }
    }
}

/// Estimates the statistical dimension of the descent cone of `reg` at `x0`
/// from `n_samples` real Gaussian draws; sample `k` uses seed
/// `derive_seed(seed, [k])`. Samples whose solve does not converge are
/// excluded and counted as failures.
pub fn estimate_statdim(
    x0: &DenseTensor<f64>,
    reg: &CompositeRegularizer,
    n_samples: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<StatDimEstimate> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n_samples}")));
    }
    x0.ensure_shape(reg.shape())?;
    for (atom, term) in reg.atoms().iter().zip(reg.terms(x0)?) {
        if term == 0.0 {
            return Err(Error::DegenerateSignal(atom.label()));
        }
    }
    opts.validate()?;
    let distances: Vec<Option<f64>> = (0..n_samples as u64)
        .into_par_iter()
        .map(|k| {
            let g = sample_gaussian::<f64>(x0.shape(), derive_seed(seed, &[k]));
            let problem = ConeDistanceProblem { g: &g, x0, regularizer: reg };
            match solve_cone_distance(&problem, opts) {
                Ok((dist, report)) if report.converged() => Some(dist * dist),
                _ => None,
            }
        })
        .collect();
    Ok(StatDimEstimate::from_samples(distances, seed))
}

/// Minimizes a convex, piecewise-quadratic function of `τ ≥ 0` given its
/// nondecreasing derivative, by bisection on `[0, upper]`.
fn minimize_1d(derivative: impl Fn(f64) -> f64, upper: f64) -> f64 {
    if derivative(0.0) >= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, upper);
    if derivative(hi) <= 0.0 {
        return hi;
    }
    while hi - lo > 1e-14 * upper.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if derivative(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn require_nonzero(x0: &DenseTensor<f64>) -> Result<()> {
    if x0.max_abs() == 0.0 {
        return Err(Error::DegenerateSignal("x0 = 0".into()));
    }
    Ok(())
}

/// Distance from `g` to the cone generated by `∂‖·‖₁(x0)`.
pub fn closed_form_l1_cone_distance(g: &DenseTensor<f64>, x0: &DenseTensor<f64>) -> Result<f64> {
    g.ensure_shape(x0.shape())?;
    require_nonzero(x0)?;
    let mut on = Vec::new();
    let mut off = Vec::new();
    for (gi, xi) in g.data().iter().zip(x0.data()) {
        if *xi != 0.0 {
            on.push(gi * xi.signum());
        } else {
            off.push(gi.abs());
        }
    }
    let value = |tau: f64| {
        on.iter().map(|v| (v - tau).powi(2)).sum::<f64>()
            + off.iter().map(|v| (v - tau).max(0.0).powi(2)).sum::<f64>()
    };
    let derivative = |tau: f64| {
        on.iter().map(|v| tau - v).sum::<f64>() - off.iter().map(|v| (v - tau).max(0.0)).sum::<f64>()
    };
    let upper = 10.0 * g.frobenius_norm() * (g.len() as f64).sqrt();
    let tau = minimize_1d(derivative, upper);
    Ok(value(tau).max(0.0).sqrt())
}

/// Distance from `g` to the cone generated by the nuclear-norm
/// subdifferential at the matrix `x0`, `{τ(UVᵀ + W) : ‖W‖ ≤ 1, W ⟂ T}`.
pub fn closed_form_nuclear_cone_distance(g: &DenseTensor<f64>, x0: &DenseTensor<f64>) -> Result<f64> {
    g.ensure_shape(x0.shape())?;
    require_nonzero(x0)?;
    let x = x0.to_matrix()?;
    let gm = g.to_matrix()?;
    let dec = svd(&x)?;
    let r = dec.numerical_rank(1e-10);
    let u = dec.u.columns(0, r).into_owned();
    let v = dec.v_t.rows(0, r).transpose();
    let uvt = &u * v.transpose();
    let pu = DMatrix::identity(x.nrows(), x.nrows()) - &u * u.transpose();
    let pv = DMatrix::identity(x.ncols(), x.ncols()) - &v * v.transpose();
    let perp = &pu * &gm * &pv;
    let tangent = &gm - &perp;
    let sigma = crate::linalg::singular_values(&perp)?;
    let t_sq = tangent.norm_squared();
    let t_dot = tangent.dot(&uvt);
    let rf = r as f64;
    let value = |tau: f64| {
        t_sq - 2.0 * tau * t_dot
            + tau * tau * rf
            + sigma.iter().map(|s| (s - tau).max(0.0).powi(2)).sum::<f64>()
    };
    let derivative =
        |tau: f64| tau * rf - t_dot - sigma.iter().map(|s| (s - tau).max(0.0)).sum::<f64>();
    let lip = (x.nrows().min(x.ncols()) as f64).sqrt();
    let tau = minimize_1d(derivative, 10.0 * gm.norm() * lip);
    Ok(value(tau).max(0.0).sqrt())
}
