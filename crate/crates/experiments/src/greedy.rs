//! Iteratively reweighted sum of two norms, `λᵢ⁽ᵗ⁺¹⁾ = 1/‖X⁽ᵗ⁾‖₍ᵢ₎`.

use multireg_core::measurement::GaussianMeasurementMap;
use multireg_core::regularizers::{CombineMode, CompositeRegularizer, NormAtom};
use multireg_core::solver::{solve_recovery, SolveReport, SolverOptions};
use multireg_core::{DenseTensor, Error, Scalar};

use crate::config::GreedyConfig;

#[derive(Debug, Clone)]
pub struct GreedyOutcome<T: Scalar> {
    pub x: DenseTensor<T>,
    /// `T + 1` weight vectors, starting with the initialization.
    pub weights: Vec<Vec<f64>>,
    pub reports: Vec<SolveReport>,
}

/// Initial weights from `Z = A*(y)`: each atom is weighted by the dual norm
/// of the other atom at `Z` (for ℓ1 + nuclear: the nuclear weight is
/// `max |Zᵢⱼ|` and the ℓ1 weight is `‖Z‖_op`). With `swap_init` each atom
/// takes its own dual norm.
pub fn initial_weights<T: Scalar>(
    a: &GaussianMeasurementMap<T>,
    y: &[T],
    atoms: &[NormAtom],
    swap_init: bool,
) -> multireg_core::Result<Vec<f64>> {
    if atoms.len() != 2 {
        return Err(Error::InvalidRegularizer(format!(
            "greedy weights need two atoms, got {}",
            atoms.len()
        )));
    }
    let z = a.adjoint(y)?;
    let mut w = Vec::with_capacity(2);
    for i in 0..2 {
        let partner = if swap_init { i } else { 1 - i };
        let v = atoms[partner].dual_norm(&z)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::DegenerateIterate(atoms[partner].label()));
        }
        w.push(v);
    }
    Ok(w)
}

pub fn greedy_weights_recover<T: Scalar>(
    a: &GaussianMeasurementMap<T>,
    y: &[T],
    atoms: &[NormAtom],
    cfg: &GreedyConfig,
    opts: &SolverOptions,
) -> multireg_core::Result<GreedyOutcome<T>> {
    if cfg.iterations == 0 {
        return Err(Error::InvalidArgument("greedy iterations must be at least 1".into()));
    }
    let mut weights = vec![initial_weights(a, y, atoms, cfg.swap_init)?];
    let mut reports = Vec::with_capacity(cfg.iterations);
    let mut x = None;
    for _ in 0..cfg.iterations {
        let current = weights.last().expect("nonempty").clone();
        let reg = CompositeRegularizer::new(CombineMode::Sum, atoms.to_vec(), current)?;
        let (xt, report) = solve_recovery(a, y, &reg, opts)?;
        let next = atoms
            .iter()
            .map(|atom| {
                let n = atom.norm(&xt)?;
                if n > 0.0 && n.is_finite() {
                    Ok(1.0 / n)
                } else {
                    Err(Error::DegenerateIterate(atom.label()))
                }
            })
            .collect::<multireg_core::Result<Vec<_>>>()?;
        weights.push(next);
        reports.push(report);
        x = Some(xt);
    }
    Ok(GreedyOutcome { x: x.expect("at least one iteration"), weights, reports })
}
