//! Binomial logistic regression of success counts on the measurement count.

use serde::{Deserialize, Serialize};

/// Ridge on the standardized coefficients; keeps separable grids finite.
const RIDGE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub intercept: f64,
    /// Change of the log-odds per measurement.
    pub slope: f64,
    /// Measurement count at 50% success, `−intercept/slope`.
    pub m50: f64,
    pub iterations: usize,
}

/// Fits `P(success | m) = σ(a + b·m)` to `(m, successes, trials)` triples by
/// Newton's method. `None` without variation in `m` or in the outcomes.
pub fn fit_logistic(points: &[(f64, usize, usize)]) -> Option<LogisticFit> {
    let total: usize = points.iter().map(|p| p.2).sum();
    let hits: usize = points.iter().map(|p| p.1).sum();
    if points.len() < 2 || hits == 0 || hits == total {
        return None;
    }
    let weight = |p: &(f64, usize, usize)| p.2 as f64;
    let mean = points.iter().map(|p| p.0 * weight(p)).sum::<f64>() / total as f64;
    let var = points.iter().map(|p| (p.0 - mean).powi(2) * weight(p)).sum::<f64>() / total as f64;
    if !(var > 0.0) {
        return None;
    }
    let sd = var.sqrt();

    let (mut a, mut b) = (0.0f64, 0.0f64);
    let mut iterations = 0;
    for it in 1..=200 {
        iterations = it;
        let (mut ga, mut gb) = (-RIDGE * a, -RIDGE * b);
        let (mut haa, mut hab, mut hbb) = (RIDGE, 0.0, RIDGE);
        for &(m, k, n) in points {
            if n == 0 {
                continue;
            }
            let x = (m - mean) / sd;
            let p = 1.0 / (1.0 + (-(a + b * x)).exp());
            let r = k as f64 - n as f64 * p;
            let w = n as f64 * p * (1.0 - p);
            ga += r;
            gb += r * x;
            haa += w;
            hab += w * x;
            hbb += w * x * x;
        }
        let det = haa * hbb - hab * hab;
        let da = (hbb * ga - hab * gb) / det;
        let db = (haa * gb - hab * ga) / det;
        a += da;
        b += db;
        if da.abs().max(db.abs()) < 1e-10 {
            break;
        }
    }
    let slope = b / sd;
    let intercept = a - b * mean / sd;
    Some(LogisticFit { intercept, slope, m50: mean - a * sd / b, iterations })
}
