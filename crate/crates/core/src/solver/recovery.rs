use crate::linalg::{norm2, DenseTensor, Scalar};
use crate::measurement::GaussianMeasurementMap;
use crate::regularizers::{CombineMode, CompositeRegularizer};
use crate::{Error, Result};

use super::polish::best_candidate;
use super::{SolveReport, SolveStatus, SolverOptions};

/// Solves `min R(x) s.t. A(x) = y` by consensus ADMM.
///
/// Sum-composites split into one proximal step per atom. Max-composites use
/// the epigraph form `min s s.t. μᵢ‖x‖₍ᵢ₎ ≤ s` with one epigraph projection
/// per atom. The returned point satisfies the constraints to roundoff.
pub fn solve_recovery<T: Scalar>(
    a: &GaussianMeasurementMap<T>,
    y: &[T],
    reg: &CompositeRegularizer,
    opts: &SolverOptions,
) -> Result<(DenseTensor<T>, SolveReport)> {
    opts.validate()?;
    if a.shape() != reg.shape() {
        return Err(Error::ShapeMismatch {
            expected: reg.shape().to_vec(),
            found: a.shape().to_vec(),
        });
    }
    if y.len() != a.rows() {
        return Err(Error::LengthMismatch { expected: a.rows(), found: y.len() });
    }
    if y.iter().any(|v| !v.abs_sq().is_finite()) {
        return Err(Error::NonFinite);
    }
    let zero = DenseTensor::<T>::zeros(reg.shape())?;
    if a.rows() == 0 || norm2(y) == 0.0 {
        return Ok((zero, SolveReport::trivial(0.0)));
    }
    let least_norm = a.least_norm_solution(y)?;
    if a.rows() >= a.dim() {
        let obj = reg.norm(&least_norm)?;
        return Ok((least_norm, SolveReport::trivial(obj)));
    }

    let scale = least_norm.frobenius_norm();
    let yn: Vec<T> = y.iter().map(|v| v.mul_real(1.0 / scale)).collect();
    let start = least_norm.scaled(1.0 / scale);
    let r0 = reg.norm(&start)?;
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::NumericalFailure(format!("regularizer value {r0} at the starting point")));
    }
    let weights: Vec<f64> = reg.weights().iter().map(|w| w / r0).collect();

    let run = match reg.mode() {
        CombineMode::Sum => consensus_sum(a, &yn, reg, &weights, start.data(), opts)?,
        CombineMode::Max => consensus_max(a, &yn, reg, &weights, start.data(), opts)?,
    };

    let shape = reg.shape().to_vec();
    let mut x = DenseTensor::from_parts_unchecked(shape.clone(), run.z);
    let mut polished = false;
    if opts.polish && run.status != SolveStatus::NumericalFailure {
        let structured = DenseTensor::from_parts_unchecked(shape, run.structured);
        if let Some((candidate, resid)) = best_candidate(&structured, a, &yn)? {
            // The refined point must stay feasible, close to the splitting
            // iterate, and must not increase the objective.
            let z_resid = a.residual_norm(x.data(), &yn);
            let close = candidate.distance(&x) <= 1e-2 * x.frobenius_norm();
            let no_worse = reg.norm(&candidate)? <= reg.norm(&x)? * (1.0 + 1e-9);
            if resid <= z_resid.max(1e-9 * norm2(&yn)) && close && no_worse {
                x = candidate;
                polished = true;
            }
        }
    }
    let x = x.scaled(scale);
    let objective = reg.norm(&x)?;
    Ok((
        x,
        SolveReport {
            iterations: run.iterations,
            primal_residual: run.primal_residual,
            dual_residual: run.dual_residual,
            objective,
            status: run.status,
            polished,
        },
    ))
}

struct Run<T> {
    z: Vec<T>,
    /// Average of the per-atom iterates, which carry the atoms' structure.
    structured: Vec<T>,
    iterations: usize,
    primal_residual: f64,
    dual_residual: f64,
    status: SolveStatus,
}

fn mean_into<T: Scalar>(blocks: &[Vec<T>], shifts: &[Vec<T>], out: &mut [T]) {
    let inv = 1.0 / blocks.len() as f64;
    out.iter_mut().for_each(|v| *v = T::zero());
    for (b, s) in blocks.iter().zip(shifts) {
        for ((o, p), q) in out.iter_mut().zip(b).zip(s) {
            *o += (*p + *q).mul_real(inv);
        }
    }
}

fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (*p - *q).abs_sq()).sum()
}

fn is_finite<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|x| x.abs_sq().is_finite())
}

struct Balance {
    rho: f64,
    adaptations: usize,
}

impl Balance {
    /// Residual balancing; returns the factor by which ρ grew.
    fn update(&mut self, it: usize, rp: f64, rd: f64, opts: &SolverOptions) -> Option<f64> {
        if !opts.adaptive_step || it % 20 != 0 || self.adaptations >= 60 || rd <= 0.0 {
            return None;
        }
        let ratio = ((rp / opts.primal_tolerance) / (rd / opts.dual_tolerance)).sqrt();
        if (0.2..=5.0).contains(&ratio) {
            return None;
        }
        let factor = ratio.clamp(1e-2, 1e2);
        self.rho *= factor;
        self.adaptations += 1;
        Some(factor)
    }
}

fn consensus_sum<T: Scalar>(
    a: &GaussianMeasurementMap<T>,
    y: &[T],
    reg: &CompositeRegularizer,
    weights: &[f64],
    start: &[T],
    opts: &SolverOptions,
) -> Result<Run<T>> {
    let k = reg.len();
    let d = start.len();
    let alpha = opts.relaxation;
    let mut bal = Balance { rho: opts.step, adaptations: 0 };
    let mut z = start.to_vec();
    let mut z_old = z.clone();
    let mut xs = vec![z.clone(); k];
    let mut us = vec![vec![T::zero(); d]; k];
    let mut structured = vec![T::zero(); d];
    let (mut rp, mut rd) = (f64::INFINITY, f64::INFINITY);
    let mut status = SolveStatus::IterationCap;
    let mut iterations = opts.max_iterations;

    for it in 1..=opts.max_iterations {
        for i in 0..k {
            for ((x, zv), u) in xs[i].iter_mut().zip(&z).zip(&us[i]) {
                *x = *zv - *u;
            }
            reg.atoms()[i].prox_in_place(&mut xs[i], weights[i] / bal.rho)?;
            if alpha != 1.0 {
                for (x, zv) in xs[i].iter_mut().zip(&z) {
                    *x = x.mul_real(alpha) + zv.mul_real(1.0 - alpha);
                }
            }
        }
        z_old.clone_from(&z);
        mean_into(&xs, &us, &mut z);
        a.project_passes(y, &mut z, 1)?;
        let mut r2 = 0.0;
        let mut u2 = 0.0;
        let mut x2 = 0.0;
        for i in 0..k {
            for ((u, x), zv) in us[i].iter_mut().zip(&xs[i]).zip(&z) {
                let diff = *x - *zv;
                *u += diff;
                r2 += diff.abs_sq();
                u2 += u.abs_sq();
                x2 += x.abs_sq();
            }
        }
        let zn = norm2(&z);
        rp = r2.sqrt() / (1.0 + zn.max((x2 / k as f64).sqrt()));
        rd = bal.rho * (k as f64 * sq_dist(&z, &z_old)).sqrt() / (1.0 + bal.rho * u2.sqrt());
        if !(rp.is_finite() && rd.is_finite() && is_finite(&z)) {
            status = SolveStatus::NumericalFailure;
            iterations = it;
            break;
        }
        if rp <= opts.primal_tolerance && rd <= opts.dual_tolerance {
            status = SolveStatus::Converged;
            iterations = it;
            break;
        }
        if let Some(f) = bal.update(it, rp, rd, opts) {
            us.iter_mut().for_each(|u| u.iter_mut().for_each(|v| *v = v.mul_real(1.0 / f)));
        }
    }
    mean_into(&xs, &vec![vec![T::zero(); d]; k], &mut structured);
    a.project_passes(y, &mut z, 2)?;
    Ok(Run { z, structured, iterations, primal_residual: rp, dual_residual: rd, status })
}

fn consensus_max<T: Scalar>(
    a: &GaussianMeasurementMap<T>,
    y: &[T],
    reg: &CompositeRegularizer,
    weights: &[f64],
    start: &[T],
    opts: &SolverOptions,
) -> Result<Run<T>> {
    let k = reg.len();
    let kf = k as f64;
    let d = start.len();
    let alpha = opts.relaxation;
    let mut bal = Balance { rho: opts.step, adaptations: 0 };
    let mut z = start.to_vec();
    let mut z_old = z.clone();
    let mut s = 1.0;
    let mut xs = vec![z.clone(); k];
    let mut ts = vec![s; k];
    let mut us = vec![vec![T::zero(); d]; k];
    let mut vs = vec![0.0; k];
    let mut structured = vec![T::zero(); d];
    let (mut rp, mut rd) = (f64::INFINITY, f64::INFINITY);
    let mut status = SolveStatus::IterationCap;
    let mut iterations = opts.max_iterations;

    for it in 1..=opts.max_iterations {
        for i in 0..k {
            for ((x, zv), u) in xs[i].iter_mut().zip(&z).zip(&us[i]) {
                *x = *zv - *u;
            }
            ts[i] = s - vs[i];
            reg.atoms()[i].project_epigraph(&mut xs[i], &mut ts[i], 1.0 / weights[i])?;
            if alpha != 1.0 {
                for (x, zv) in xs[i].iter_mut().zip(&z) {
                    *x = x.mul_real(alpha) + zv.mul_real(1.0 - alpha);
                }
                ts[i] = alpha * ts[i] + (1.0 - alpha) * s;
            }
        }
        z_old.clone_from(&z);
        let s_old = s;
        mean_into(&xs, &us, &mut z);
        a.project_passes(y, &mut z, 1)?;
        s = ts.iter().zip(&vs).map(|(t, v)| t + v).sum::<f64>() / kf - 1.0 / (kf * bal.rho);
        let mut r2 = 0.0;
        let mut u2 = 0.0;
        let mut x2 = 0.0;
        for i in 0..k {
            for ((u, x), zv) in us[i].iter_mut().zip(&xs[i]).zip(&z) {
                let diff = *x - *zv;
                *u += diff;
                r2 += diff.abs_sq();
                u2 += u.abs_sq();
                x2 += x.abs_sq();
            }
            let diff = ts[i] - s;
            vs[i] += diff;
            r2 += diff * diff;
            u2 += vs[i] * vs[i];
            x2 += ts[i] * ts[i];
        }
        let zn = (norm2(&z).powi(2) + s * s).sqrt();
        rp = r2.sqrt() / (1.0 + zn.max((x2 / kf).sqrt()));
        let step = (sq_dist(&z, &z_old) + (s - s_old).powi(2)).sqrt();
        rd = bal.rho * kf.sqrt() * step / (1.0 + bal.rho * u2.sqrt());
        if !(rp.is_finite() && rd.is_finite() && is_finite(&z)) {
            status = SolveStatus::NumericalFailure;
            iterations = it;
            break;
        }
        if rp <= opts.primal_tolerance && rd <= opts.dual_tolerance {
            status = SolveStatus::Converged;
            iterations = it;
            break;
        }
        if let Some(f) = bal.update(it, rp, rd, opts) {
            us.iter_mut().for_each(|u| u.iter_mut().for_each(|v| *v = v.mul_real(1.0 / f)));
            vs.iter_mut().for_each(|v| *v /= f);
        }
    }
    mean_into(&xs, &vec![vec![T::zero(); d]; k], &mut structured);
    a.project_passes(y, &mut z, 2)?;
    Ok(Run { z, structured, iterations, primal_residual: rp, dual_residual: rd, status })
}
