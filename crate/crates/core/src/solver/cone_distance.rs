use nalgebra::{DMatrix, DVector};

use crate::linalg::{norm2, real_inner, svd, DenseTensor, Matricization, Scalar};
use crate::regularizers::{CombineMode, CompositeRegularizer, NormAtom};
use crate::{Error, Result};

use super::conic::{self, AffineStep, Blocks, ConeProjection};
use super::{SolveReport, SolveStatus, SolverOptions};

/// Relative singular-value cutoff defining the rank of `x0` in a matricization.
pub(crate) const FACE_RANK_TOL: f64 = 1e-10;

/// Distance from `g` to the cone generated by the subdifferential of the
/// composite regularizer at `x0`.
#[derive(Debug, Clone, Copy)]
pub struct ConeDistanceProblem<'a, T: Scalar = f64> {
    pub g: &'a DenseTensor<T>,
    pub x0: &'a DenseTensor<T>,
    pub regularizer: &'a CompositeRegularizer,
}

/// `∂‖·‖(x0) = E + {W ∈ T⊥ : ‖W‖° ≤ 1}`. The cone blocks hold `(W, t)`
/// with `W ∈ T⊥`, `‖W‖° ≤ t`, and contribute `t·E + W`.
enum Face<'a, T: Scalar> {
    Support { on: Vec<bool> },
    Tangent { mat: &'a Matricization, u: DMatrix<T>, v: DMatrix<T> },
}

impl<'a, T: Scalar> Face<'a, T> {
    /// The face at `x0` and its center `E`.
    fn at(atom: &'a NormAtom, x0: &[T]) -> Result<(Self, Vec<T>)> {
        match atom.matricization() {
            None => {
                let on: Vec<bool> = x0.iter().map(|v| v.abs_val() != 0.0).collect();
                let center = x0
                    .iter()
                    .map(|v| if v.abs_val() != 0.0 { v.mul_real(1.0 / v.abs_val()) } else { T::zero() })
                    .collect();
                Ok((Face::Support { on }, center))
            }
            Some(mat) => {
                let dec = svd(&mat.to_matrix(x0))?;
                let r = dec.numerical_rank(FACE_RANK_TOL);
                let u = dec.u.columns(0, r).into_owned();
                let v = dec.v_t.rows(0, r).adjoint();
                let mut center = vec![T::zero(); x0.len()];
                mat.write_matrix(&(&u * v.adjoint()), &mut center);
                Ok((Face::Tangent { mat, u, v }, center))
            }
        }
    }
}

impl<T: Scalar> ConeProjection<T> for Face<'_, T> {
    fn project(&self, x: &mut [T], t: &mut f64) -> Result<()> {
        match self {
            Face::Support { on } => {
                let mut off: Vec<T> = x.iter().zip(on).filter(|(_, &s)| !s).map(|(v, _)| *v).collect();
                super::epigraph::project_epigraph_linf_scaled(&mut off, t, 1.0);
                let mut it = off.into_iter();
                for (v, &s) in x.iter_mut().zip(on) {
                    *v = if s { T::zero() } else { it.next().unwrap_or_else(T::zero) };
                }
            }
            Face::Tangent { mat, u, v } => {
                let m = mat.to_matrix(x);
                let left = &m - u * u.ad_mul(&m);
                let perp = &left - (&left * v) * v.adjoint();
                let (p, pt) = super::epigraph::project_epigraph_spectral_scaled(&perp, *t, 1.0)?;
                mat.write_matrix(&p, x);
                *t = pt;
            }
        }
        Ok(())
    }
}

/// Minimizes `½‖g − Σᵢ(xᵢ + tᵢEᵢ)‖²` with `t = L s` for free scalars `s`;
/// returns the block point `(xᵢ, tᵢ)`.
struct DistanceStep<T> {
    g: Vec<T>,
    /// Columns `F_j = Σᵢ L_ij Eᵢ`.
    f: Vec<Vec<T>>,
    /// `L` as rows per block.
    link: Vec<Vec<f64>>,
}

impl<T: Scalar> DistanceStep<T> {
    fn combined(&self, s: &[f64]) -> Vec<T> {
        let mut out = vec![T::zero(); self.g.len()];
        for (fj, sj) in self.f.iter().zip(s) {
            crate::linalg::axpy(*sj, fj, &mut out);
        }
        out
    }
}

impl<T: Scalar> AffineStep<T> for DistanceStep<T> {
    fn solve(&self, q: &Blocks<T>, rho: f64, out: &mut Blocks<T>) {
        let k = q.x.len();
        let p = self.f.len();
        let c = rho + k as f64;
        let mut base = self.g.clone();
        for b in &q.x {
            crate::linalg::axpy(-1.0, b, &mut base);
        }
        let mut lhs = DMatrix::<f64>::zeros(p, p);
        let mut rhs = DVector::<f64>::zeros(p);
        for j in 0..p {
            rhs[j] = real_inner(&self.f[j], &base) / c
                + (0..k).map(|i| self.link[i][j] * q.t[i]).sum::<f64>();
            for l in 0..p {
                lhs[(j, l)] = real_inner(&self.f[j], &self.f[l]) / c
                    + (0..k).map(|i| self.link[i][j] * self.link[i][l]).sum::<f64>();
            }
        }
        let s = match lhs.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => lhs.pseudo_inverse(1e-14).map(|pinv| pinv * &rhs).unwrap_or(rhs),
        };
        let fs = self.combined(s.as_slice());
        for (b, v) in base.iter_mut().zip(&fs) {
            *b = (*b - *v).mul_real(1.0 / c);
        }
        for i in 0..k {
            for ((o, qv), r) in out.x[i].iter_mut().zip(&q.x[i]).zip(&base) {
                *o = *qv + *r;
            }
            out.t[i] = (0..p).map(|j| self.link[i][j] * s[j]).sum();
        }
    }
}

/// Euclidean distance from `g` to the closed cone generated by `∂R(x0)`.
///
/// Each atom's subdifferential is written as `E + {W ∈ T⊥ : ‖W‖° ≤ 1}`
/// (sign/phase pattern and off-support part for ℓ1, `UVᴴ` and the
/// orthogonal complement of the tangent space for nuclear norms). Sum mode
/// shares one scale `τ` with block levels `λᵢτ`; max mode with all terms
/// active has one free level per atom. `g` and `x0` are rescaled to unit norm.
pub fn solve_cone_distance<T: Scalar>(
    problem: &ConeDistanceProblem<'_, T>,
    opts: &SolverOptions,
) -> Result<(f64, SolveReport)> {
    let reg = problem.regularizer;
    problem.g.ensure_shape(reg.shape())?;
    problem.x0.ensure_shape(reg.shape())?;
    let x0_norm = problem.x0.frobenius_norm();
    if x0_norm == 0.0 {
        return Err(Error::DegenerateSignal("cone of the regularizer at x0 = 0 is not pointed".into()));
    }
    let g_norm = problem.g.frobenius_norm();
    if g_norm == 0.0 {
        return Ok((0.0, SolveReport::trivial(0.0)));
    }
    let x0 = problem.x0.scaled(1.0 / x0_norm);
    let g: Vec<T> = problem.g.data().iter().map(|v| v.mul_real(1.0 / g_norm)).collect();
    // weighted values wᵢ‖x₀‖₍ᵢ₎
    let terms = reg.terms(&x0)?;
    let active: Vec<usize> = match reg.mode() {
        CombineMode::Sum => (0..terms.len()).collect(),
        CombineMode::Max => {
            let value = terms.iter().copied().fold(0.0, f64::max);
            (0..terms.len()).filter(|&i| terms[i] >= value * (1.0 - 1e-9)).collect()
        }
    };

    let mut faces = Vec::with_capacity(active.len());
    let mut centers = Vec::with_capacity(active.len());
    for &i in &active {
        let (face, center) = Face::at(&reg.atoms()[i], x0.data())?;
        faces.push(face);
        centers.push(center);
    }
    let k = active.len();
    let (f, link) = match reg.mode() {
        CombineMode::Sum => {
            let weights = reg.weights();
            let mut f1 = vec![T::zero(); x0.len()];
            for (c, w) in centers.iter().zip(weights) {
                crate::linalg::axpy(*w, c, &mut f1);
            }
            (vec![f1], weights.iter().map(|w| vec![*w]).collect())
        }
        CombineMode::Max => {
            let link = (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
            (centers.clone(), link)
        }
    };
    let step = DistanceStep { g, f, link };
    let outcome = conic::run(&step, &faces, x0.len(), opts)?;
    let mut resid = step.g.clone();
    for b in &outcome.w.x {
        crate::linalg::axpy(-1.0, b, &mut resid);
    }
    for (c, t) in centers.iter().zip(&outcome.w.t) {
        crate::linalg::axpy(-t, c, &mut resid);
    }
    let dist = norm2(&resid) * g_norm;
    let report = SolveReport {
        iterations: outcome.iterations,
        primal_residual: outcome.primal_residual,
        dual_residual: outcome.dual_residual,
        objective: 0.5 * dist * dist,
        status: if dist.is_finite() { outcome.status } else { SolveStatus::NumericalFailure },
        polished: false,
    };
    Ok((dist, report))
}
