//! ADMM over products of norm-epigraph cones:
//! minimize `F(w)` over an affine set, subject to `w ∈ K₁ × … × K_k`,
//! with each `Kᵢ = {(xᵢ, tᵢ) : ‖xᵢ‖ ≤ tᵢ}` for an atom norm or its dual.

use crate::linalg::norm2;
use crate::linalg::Scalar;
use crate::regularizers::NormAtom;
use crate::Result;

use super::{SolveStatus, SolverOptions};

#[derive(Debug, Clone)]
pub(crate) struct Blocks<T> {
    pub x: Vec<Vec<T>>,
    pub t: Vec<f64>,
}

impl<T: Scalar> Blocks<T> {
    pub fn zeros(k: usize, d: usize) -> Self {
        Self { x: vec![vec![T::zero(); d]; k], t: vec![0.0; k] }
    }

    fn norm_sq(&self) -> f64 {
        let x: f64 = self.x.iter().map(|b| norm2(b).powi(2)).sum();
        x + self.t.iter().map(|v| v * v).sum::<f64>()
    }

    fn dist_sq(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.x.iter().zip(&other.x) {
            acc += a.iter().zip(b).map(|(p, q)| (*p - *q).abs_sq()).sum::<f64>();
        }
        acc + self.t.iter().zip(&other.t).map(|(p, q)| (p - q).powi(2)).sum::<f64>()
    }

    /// `self ← a·self + b·other`.
    fn combine(&mut self, a: f64, other: &Self, b: f64) {
        for (s, o) in self.x.iter_mut().zip(&other.x) {
            for (p, q) in s.iter_mut().zip(o) {
                *p = p.mul_real(a) + q.mul_real(b);
            }
        }
        for (p, q) in self.t.iter_mut().zip(&other.t) {
            *p = a * *p + b * q;
        }
    }

    fn scale(&mut self, a: f64) {
        for s in self.x.iter_mut() {
            s.iter_mut().for_each(|p| *p = p.mul_real(a));
        }
        self.t.iter_mut().for_each(|p| *p *= a);
    }

    fn is_finite(&self) -> bool {
        self.x.iter().all(|b| b.iter().all(|v| v.abs_sq().is_finite()))
            && self.t.iter().all(|v| v.is_finite())
    }
}

/// Minimizer of `F(w) + (ρ/2)‖w − q‖²` over the affine set.
pub(crate) trait AffineStep<T: Scalar> {
    fn solve(&self, q: &Blocks<T>, rho: f64, out: &mut Blocks<T>);
}

/// Projection onto a closed convex cone in `(x, t)` space.
pub(crate) trait ConeProjection<T: Scalar> {
    fn project(&self, x: &mut [T], t: &mut f64) -> Result<()>;
}

/// Epigraph of an atom's dual norm, `{‖x‖° ≤ t}`.
pub(crate) struct DualBall<'a>(pub &'a NormAtom);

impl<T: Scalar> ConeProjection<T> for DualBall<'_> {
    fn project(&self, x: &mut [T], t: &mut f64) -> Result<()> {
        self.0.project_dual_epigraph(x, t, 1.0)
    }
}

pub(crate) struct Outcome<T> {
    pub w: Blocks<T>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub status: SolveStatus,
}

pub(crate) fn run<T: Scalar, S: AffineStep<T>, C: ConeProjection<T>>(
    step: &S,
    cones: &[C],
    dim: usize,
    opts: &SolverOptions,
) -> Result<Outcome<T>> {
    opts.validate()?;
    let k = cones.len();
    let alpha = opts.relaxation;
    let mut rho = opts.step;
    let mut v = Blocks::<T>::zeros(k, dim);
    let mut u = Blocks::<T>::zeros(k, dim);
    let mut w = Blocks::<T>::zeros(k, dim);
    let mut q = Blocks::<T>::zeros(k, dim);
    let mut v_old = v.clone();
    let mut adaptations = 0;
    let (mut rp, mut rd) = (f64::INFINITY, f64::INFINITY);

    for it in 1..=opts.max_iterations {
        q.clone_from(&v);
        q.combine(1.0, &u, -1.0);
        step.solve(&q, rho, &mut w);

        // relaxed point w̃ = α w + (1 − α) v, then v ← Π(w̃ + u)
        v_old.clone_from(&v);
        let mut wt = w.clone();
        wt.combine(alpha, &v_old, 1.0 - alpha);
        v.clone_from(&wt);
        v.combine(1.0, &u, 1.0);
        for (i, cone) in cones.iter().enumerate() {
            cone.project(&mut v.x[i], &mut v.t[i])?;
        }
        u.combine(1.0, &wt, 1.0);
        u.combine(1.0, &v, -1.0);

        let r = w.dist_sq(&v).sqrt();
        let s = rho * v.dist_sq(&v_old).sqrt();
        let scale_p = 1.0 + w.norm_sq().sqrt().max(v.norm_sq().sqrt());
        let scale_d = 1.0 + rho * u.norm_sq().sqrt();
        rp = r / scale_p;
        rd = s / scale_d;
        if !(rp.is_finite() && rd.is_finite()) || !w.is_finite() {
            return Ok(Outcome {
                w,
                iterations: it,
                primal_residual: rp,
                dual_residual: rd,
                status: SolveStatus::NumericalFailure,
            });
        }
        if rp <= opts.primal_tolerance && rd <= opts.dual_tolerance {
            return Ok(Outcome {
                w,
                iterations: it,
                primal_residual: rp,
                dual_residual: rd,
                status: SolveStatus::Converged,
            });
        }
        if opts.adaptive_step && it % 20 == 0 && adaptations < 60 && rd > 0.0 {
            let ratio = ((rp / opts.primal_tolerance) / (rd / opts.dual_tolerance)).sqrt();
            if !(0.2..=5.0).contains(&ratio) {
                let factor = ratio.clamp(1e-2, 1e2);
                rho *= factor;
                u.scale(1.0 / factor);
                adaptations += 1;
            }
        }
    }
    Ok(Outcome {
        w,
        iterations: opts.max_iterations,
        primal_residual: rp,
        dual_residual: rd,
        status: SolveStatus::IterationCap,
    })
}
