//! Exact Euclidean projections onto norm epigraph cones.
//!
//! All entry points accept a scale `c > 0` and project onto
//! `{(x, t) : ‖x‖ ≤ c·t}`; the plain versions use `c = 1`.

use nalgebra::DMatrix;

use crate::linalg::{svd, Scalar};
use crate::Result;

/// Threshold `θ ≥ 0` of the projection of `(a, t)`, `a ≥ 0`, onto
/// `{‖a‖₁ ≤ c·t}`. The projection is `((a − θ)₊, t + c·θ)`.
fn l1_epigraph_threshold(mags: &[f64], t: f64, c: f64) -> f64 {
    let total: f64 = mags.iter().sum();
    if total <= c * t {
        return 0.0;
    }
    let mut sorted = mags.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let top = sorted.first().copied().unwrap_or(0.0);
    if -t / c >= top {
        return -t / c;
    }
    let c2 = c * c;
    let mut partial = 0.0;
    for k in 0..sorted.len() {
        partial += sorted[k];
        let theta = (partial - c * t) / ((k + 1) as f64 + c2);
        let lower = sorted.get(k + 1).copied().unwrap_or(0.0);
        if theta >= lower {
            return theta.max(0.0);
        }
    }
    0.0
}

fn shrink_moduli<T: Scalar>(x: &mut [T], theta: f64) {
    for v in x.iter_mut() {
        let m = v.abs_val();
        *v = if m > theta {
            v.mul_real((m - theta) / m)
        } else {
            T::zero()
        };
    }
}

fn clip_moduli<T: Scalar>(x: &mut [T], level: f64) {
    for v in x.iter_mut() {
        let m = v.abs_val();
        if m > level {
            *v = v.mul_real(level / m);
        }
    }
}

/// In-place projection onto `{‖x‖₁ ≤ c·t}` (moduli for complex entries).
pub fn project_epigraph_l1_scaled<T: Scalar>(x: &mut [T], t: &mut f64, c: f64) {
    let mags: Vec<f64> = x.iter().map(|v| v.abs_val()).collect();
    let theta = l1_epigraph_threshold(&mags, *t, c);
    if theta > 0.0 {
        shrink_moduli(x, theta);
        *t += c * theta;
    }
    if *t < 0.0 {
        *t = 0.0;
    }
}

/// In-place projection onto `{‖x‖_∞ ≤ c·t}` via the Moreau decomposition with
/// the polar cone `{‖y‖₁ ≤ −s/c}`.
pub fn project_epigraph_linf_scaled<T: Scalar>(x: &mut [T], t: &mut f64, c: f64) {
    let mags: Vec<f64> = x.iter().map(|v| v.abs_val()).collect();
    let theta = l1_epigraph_threshold(&mags, -*t, 1.0 / c);
    clip_moduli(x, theta);
    *t = theta / c;
}

/// Projection of `(x, t)` onto `{(x, t) : ‖x‖₁ ≤ t}`.
pub fn project_epigraph_l1<T: Scalar>(x: &[T], t: f64) -> (Vec<T>, f64) {
    let mut out = x.to_vec();
    let mut t = t;
    project_epigraph_l1_scaled(&mut out, &mut t, 1.0);
    (out, t)
}

/// Projection of `(x, t)` onto `{(x, t) : ‖x‖_∞ ≤ t}`.
pub fn project_epigraph_linf<T: Scalar>(x: &[T], t: f64) -> (Vec<T>, f64) {
    let mut out = x.to_vec();
    let mut t = t;
    project_epigraph_linf_scaled(&mut out, &mut t, 1.0);
    (out, t)
}

/// Projection onto `{‖X‖_op ≤ c·t}`; singular values are projected jointly
/// with `t` onto the ℓ∞ epigraph.
pub fn project_epigraph_spectral_scaled<T: Scalar>(
    m: &DMatrix<T>,
    t: f64,
    c: f64,
) -> Result<(DMatrix<T>, f64)> {
    let s = svd(m)?;
    let top = s.singular_values.first().copied().unwrap_or(0.0);
    if top <= c * t {
        return Ok((m.clone(), t.max(0.0)));
    }
    let mut values = s.singular_values.clone();
    let mut t = t;
    project_epigraph_linf_scaled(&mut values, &mut t, c);
    Ok((s.reassemble(&values), t))
}

/// Projection onto `{‖X‖_* ≤ c·t}`.
pub fn project_epigraph_nuclear_scaled<T: Scalar>(
    m: &DMatrix<T>,
    t: f64,
    c: f64,
) -> Result<(DMatrix<T>, f64)> {
    let s = svd(m)?;
    let total: f64 = s.singular_values.iter().sum();
    if total <= c * t {
        return Ok((m.clone(), t));
    }
    let mut values = s.singular_values.clone();
    let mut t = t;
    project_epigraph_l1_scaled(&mut values, &mut t, c);
    Ok((s.reassemble(&values), t))
}

/// Projection of `(X, t)` onto `{(X, t) : σ₁(X) ≤ t}`.
pub fn project_epigraph_spectral<T: Scalar>(m: &DMatrix<T>, t: f64) -> Result<(DMatrix<T>, f64)> {
    project_epigraph_spectral_scaled(m, t, 1.0)
}
