//! Operator-splitting solvers: recovery programs `min ‖x‖_reg s.t. A(x) = y`,
//! Gaussian distances to subdifferential cones, and composite dual norms.

mod cone_distance;
mod conic;
mod dual_norm;
pub mod epigraph;
mod polish;
mod recovery;

use serde::{Deserialize, Serialize};

pub use cone_distance::{solve_cone_distance, ConeDistanceProblem};
pub use dual_norm::composite_dual_norm;
pub use epigraph::{project_epigraph_l1, project_epigraph_linf, project_epigraph_spectral};
pub use polish::polish;
pub use recovery::solve_recovery;

/// Tuning knobs of the splitting iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Relative tolerance on the primal (constraint) residual.
    pub primal_tolerance: f64,
    /// Relative tolerance on the dual / fixed-point residual.
    pub dual_tolerance: f64,
    /// Initial penalty parameter ρ.
    pub step: f64,
    /// Over-relaxation parameter in (0, 2).
    pub relaxation: f64,
    /// Residual balancing of ρ during the first iterations.
    pub adaptive_step: bool,
    /// Restricted least-squares refinement of recovery solutions.
    pub polish: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self::recovery()
    }
}

impl SolverOptions {
    /// Defaults for Gaussian-distance and dual-norm programs.
    pub fn distance() -> Self {
        Self {
            max_iterations: 20_000,
            primal_tolerance: 1e-7,
            dual_tolerance: 1e-7,
            step: 1.0,
            relaxation: 1.0,
            adaptive_step: true,
            polish: false,
        }
    }

    /// Defaults for recovery programs.
    pub fn recovery() -> Self {
        Self {
            max_iterations: 20_000,
            primal_tolerance: 1e-6,
            dual_tolerance: 1e-6,
            step: 1.0,
            relaxation: 1.0,
            adaptive_step: true,
            polish: true,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.max_iterations >= 1
            && self.primal_tolerance > 0.0
            && self.dual_tolerance > 0.0
            && self.step > 0.0
            && self.relaxation > 0.0
            && self.relaxation < 2.0;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::InvalidArgument(format!("invalid solver options {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    IterationCap,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
    pub status: SolveStatus,
    /// Whether the polished iterate replaced the splitting iterate.
    pub polished: bool,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub(crate) fn trivial(objective: f64) -> Self {
        Self {
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            objective,
            status: SolveStatus::Converged,
            polished: false,
        }
    }
}
