use crate::linalg::{DenseTensor, Scalar};
use crate::regularizers::{CombineMode, CompositeRegularizer};
use crate::Result;

use super::conic::{self, AffineStep, Blocks, DualBall};
use super::{SolveReport, SolveStatus, SolverOptions};

/// Splits `y = Σ yᵢ` and minimizes the weighted combination of atom duals:
/// `Σ ‖yᵢ‖°/μᵢ` for a max-composite, `maxᵢ ‖yᵢ‖°/λᵢ` for a sum-composite.
struct DualStep<T> {
    y: Vec<T>,
    mode: CombineMode,
    weights: Vec<f64>,
}

impl<T: Scalar> AffineStep<T> for DualStep<T> {
    fn solve(&self, q: &Blocks<T>, rho: f64, out: &mut Blocks<T>) {
        let k = q.x.len();
        let mut gap = self.y.clone();
        for b in &q.x {
            for (g, v) in gap.iter_mut().zip(b) {
                *g -= *v;
            }
        }
        let share = 1.0 / k as f64;
        for i in 0..k {
            for ((o, v), g) in out.x[i].iter_mut().zip(&q.x[i]).zip(&gap) {
                *o = *v + g.mul_real(share);
            }
        }
        match self.mode {
            CombineMode::Max => {
                for i in 0..k {
                    out.t[i] = q.t[i] - 1.0 / (rho * self.weights[i]);
                }
            }
            CombineMode::Sum => {
                let num: f64 = self.weights.iter().zip(&q.t).map(|(l, t)| l * t).sum::<f64>() - 1.0 / rho;
                let den: f64 = self.weights.iter().map(|l| l * l).sum();
                let level = num / den;
                for i in 0..k {
                    out.t[i] = self.weights[i] * level;
                }
            }
        }
    }
}

/// Dual norm of a composite regularizer by infimal decomposition.
///
/// The returned value is evaluated at an exact decomposition `y = Σ yᵢ`, so
/// it upper-bounds the dual norm; it is accurate to the solver tolerance.
pub fn composite_dual_norm<T: Scalar>(
    y: &DenseTensor<T>,
    reg: &CompositeRegularizer,
    opts: &SolverOptions,
) -> Result<(f64, SolveReport)> {
    y.ensure_shape(reg.shape())?;
    let scale = y.frobenius_norm();
    if scale == 0.0 {
        return Ok((0.0, SolveReport::trivial(0.0)));
    }
    let atoms = reg.atoms();
    let weights = reg.weights();
    if atoms.len() == 1 {
        let v = atoms[0].dual_norm(y)? / weights[0];
        return Ok((v, SolveReport::trivial(v)));
    }
    let step = DualStep {
        y: y.data().iter().map(|v| v.mul_real(1.0 / scale)).collect(),
        mode: reg.mode(),
        weights: weights.to_vec(),
    };
    let cones: Vec<DualBall<'_>> = atoms.iter().map(DualBall).collect();
    let outcome = conic::run(&step, &cones, y.len(), opts)?;
    let mut parts = Vec::with_capacity(atoms.len());
    for (a, (x, w)) in atoms.iter().zip(outcome.w.x.iter().zip(weights)) {
        parts.push(a.dual_norm_slice(x)? / w);
    }
    let value = scale
        * match reg.mode() {
            CombineMode::Max => parts.iter().sum::<f64>(),
            CombineMode::Sum => parts.iter().copied().fold(0.0, f64::max),
        };
    let status = if value.is_finite() { outcome.status } else { SolveStatus::NumericalFailure };
    Ok((
        value,
        SolveReport {
            iterations: outcome.iterations,
            primal_residual: outcome.primal_residual,
            dual_residual: outcome.dual_residual,
            objective: value,
            status,
            polished: false,
        },
    ))
}
