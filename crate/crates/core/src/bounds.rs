//! Closed-form lower bounds on the number of Gaussian measurements.

use serde::{Deserialize, Serialize};

use crate::linalg::{DenseTensor, Scalar};
use crate::regularizers::NormAtom;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub atoms: Vec<String>,
    pub lipschitz: Vec<f64>,
    pub f_ranks: Vec<f64>,
    pub kappa_terms: Vec<f64>,
    /// Minimum of the per-atom terms.
    pub kappa: f64,
    /// `cos θ = minᵢ ‖x₀‖₍ᵢ₎ / (Lᵢ‖x₀‖_F)`, so that `κ = d cos²θ − 2`.
    pub cos_theta: f64,
    pub dim: usize,
}

/// Lipschitz constant of the atom norm with respect to the Frobenius norm.
pub fn lipschitz(atom: &NormAtom, shape: &[usize]) -> Result<f64> {
    if atom.shape() != shape {
        return Err(Error::ShapeMismatch { expected: atom.shape().to_vec(), found: shape.to_vec() });
    }
    Ok(atom.lipschitz())
}

/// `‖x₀‖²_atom / ‖x₀‖²_F`.
pub fn f_rank<T: Scalar>(x0: &DenseTensor<T>, atom: &NormAtom) -> Result<f64> {
    let fro = x0.frobenius_norm();
    if fro == 0.0 {
        return Err(Error::DegenerateSignal("x0 = 0".into()));
    }
    let f = atom.norm(x0)?;
    Ok(f * f / (fro * fro))
}

/// `κ = minᵢ d‖x₀‖²₍ᵢ₎ / (Lᵢ²‖x₀‖²_F) − 2` with all per-atom ingredients.
pub fn kappa_general<T: Scalar>(x0: &DenseTensor<T>, atoms: &[NormAtom]) -> Result<BoundReport> {
    if atoms.is_empty() {
        return Err(Error::InvalidRegularizer("no atoms".into()));
    }
    let d = x0.len();
    let mut report = BoundReport {
        atoms: Vec::new(),
        lipschitz: Vec::new(),
        f_ranks: Vec::new(),
        kappa_terms: Vec::new(),
        kappa: f64::INFINITY,
        cos_theta: f64::INFINITY,
        dim: d,
    };
    for atom in atoms {
        let l = lipschitz(atom, x0.shape())?;
        let fr = f_rank(x0, atom)?;
        let cos = (fr.sqrt() / l).min(1.0);
        let term = d as f64 * fr / (l * l) - 2.0;
        report.atoms.push(atom.label());
        report.lipschitz.push(l);
        report.f_ranks.push(fr);
        report.kappa_terms.push(term);
        report.kappa = report.kappa.min(term);
        report.cos_theta = report.cos_theta.min(cos);
    }
    Ok(report)
}

/// Upper bound `min(1, 4 exp(−(κ − m)²/(8κ)))` on the probability that `m`
/// Gaussian measurements recover `x₀`, valid for `m ≤ κ`.
pub fn success_prob_upper(m: f64, kappa: f64) -> Result<f64> {
    if !(m >= 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!("m = {m}, κ = {kappa}")));
    }
    if m > kappa {
        return Err(Error::BoundNotApplicable(format!("m = {m} exceeds κ = {kappa}")));
    }
    if kappa <= 0.0 {
        return Ok(1.0);
    }
    Ok((4.0 * (-(kappa - m).powi(2) / (8.0 * kappa)).exp()).min(1.0))
}

/// `d sin²θ + 2`, an upper bound on the statistical dimension of the polar of
/// a circular cone of half-angle `θ`.
pub fn circ_cone_statdim_upper(d: usize, theta: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidArgument(format!("θ = {theta} outside [0, π/2]")));
    }
    Ok(d as f64 * theta.sin().powi(2) + 2.0)
}

/// Worst-case `r·min(n̄, s₁s₂) − 2` for the simultaneously sparse and low-rank
/// model, `n̄ = n₁n₂ / min(n₁, n₂)`.
pub fn sparse_lowrank_kappa(n1: usize, n2: usize, r: usize, s1: usize, s2: usize) -> Result<f64> {
    if n1 == 0 || n2 == 0 || r == 0 || s1 == 0 || s2 == 0 || s1 > n1 || s2 > n2 {
        return Err(Error::InvalidModel(format!("(n1, n2, r, s1, s2) = ({n1}, {n2}, {r}, {s1}, {s2})")));
    }
    let n_bar = (n1 * n2) as f64 / n1.min(n2) as f64;
    Ok(r as f64 * n_bar.min((s1 * s2) as f64) - 2.0)
}
