//! Restricted least-squares refinement: guess a low-dimensional model (a
//! support, a tangent space of a low-rank variety) from an approximate
//! solution, and solve `A(x) = y` exactly inside it.

use nalgebra::DMatrix;

use crate::linalg::{norm2, svd, Bipartition, DenseTensor, Matricization, Scalar};
use crate::measurement::GaussianMeasurementMap;
use crate::Result;

const SUPPORT_TOL: f64 = 1e-3;
const RANK_TOL: f64 = 1e-3;
const TANGENT_ROUNDS: usize = 3;

/// Sparse basis vector, `(flat index, value)` pairs.
type Basis<T> = Vec<Vec<(usize, T)>>;

struct Model<T> {
    basis: Basis<T>,
    dim: usize,
}

#[derive(Clone, Copy)]
enum Kind {
    Support,
    Tangent,
    SupportTangent,
    RankOneTensor,
}

/// Polishes `x_hat`, keeping it unless a candidate model reproduces `y` at
/// least as well.
pub fn polish<T: Scalar>(
    x_hat: &DenseTensor<T>,
    a: &GaussianMeasurementMap<T>,
    y: &[T],
) -> Result<DenseTensor<T>> {
    x_hat.ensure_shape(a.shape())?;
    let base = a.residual_norm(x_hat.data(), y);
    match best_candidate(x_hat, a, y)? {
        Some((x, r)) if r <= base => Ok(x),
        _ => Ok(x_hat.clone()),
    }
}

/// Best restricted least-squares fit over the candidate models whose
/// dimension is below the number of measurements, with its residual.
pub(crate) fn best_candidate<T: Scalar>(
    x_hat: &DenseTensor<T>,
    a: &GaussianMeasurementMap<T>,
    y: &[T],
) -> Result<Option<(DenseTensor<T>, f64)>> {
    if x_hat.max_abs() == 0.0 || a.rows() == 0 {
        return Ok(None);
    }
    let kinds: &[Kind] = match x_hat.order() {
        1 => &[Kind::Support],
        2 => &[Kind::Support, Kind::Tangent, Kind::SupportTangent],
        _ => &[Kind::Support, Kind::RankOneTensor],
    };
    let tie = 1e-12 * norm2(y).max(f64::MIN_POSITIVE);
    let mut best: Option<(DenseTensor<T>, f64, usize)> = None;
    for &kind in kinds {
        let Some(model) = build(kind, x_hat)? else { continue };
        if model.dim >= a.rows() {
            continue;
        }
        let dim = model.dim;
        let mut x = fit(a, y, &model, x_hat)?;
        let mut r = a.residual_norm(x.data(), y);
        if !matches!(kind, Kind::Support) {
            for _ in 1..TANGENT_ROUNDS {
                let Some(next_model) = build(kind, &x)? else { break };
                let next = fit(a, y, &next_model, &x)?;
                let nr = a.residual_norm(next.data(), y);
                if !(nr < r) {
                    break;
                }
                x = next;
                r = nr;
            }
        }
        if !r.is_finite() {
            continue;
        }
        let better = match &best {
            None => true,
            Some((_, br, bd)) => r < br - tie || (r <= br + tie && dim < *bd),
        };
        if better {
            best = Some((x, r, dim));
        }
    }
    Ok(best.map(|(x, r, _)| (x, r)))
}

fn build<T: Scalar>(kind: Kind, x: &DenseTensor<T>) -> Result<Option<Model<T>>> {
    let level = SUPPORT_TOL * x.max_abs();
    if level == 0.0 {
        return Ok(None);
    }
    match kind {
        Kind::Support => {
            let basis: Basis<T> = (0..x.len())
                .filter(|&i| x.data()[i].abs_val() > level)
                .map(|i| vec![(i, T::one())])
                .collect();
            let dim = basis.len();
            Ok(Some(Model { basis, dim }))
        }
        Kind::Tangent | Kind::SupportTangent => {
            let mat = Matricization::new(x.shape(), &Bipartition::new([0])?)?;
            let full = mat.to_matrix(x.data());
            let (rows, cols): (Vec<usize>, Vec<usize>) = if matches!(kind, Kind::SupportTangent) {
                let rows = (0..mat.rows())
                    .filter(|&r| (0..mat.cols()).any(|c| full[(r, c)].abs_val() > level))
                    .collect();
                let cols = (0..mat.cols())
                    .filter(|&c| (0..mat.rows()).any(|r| full[(r, c)].abs_val() > level))
                    .collect();
                (rows, cols)
            } else {
                ((0..mat.rows()).collect(), (0..mat.cols()).collect())
            };
            if matches!(kind, Kind::SupportTangent) && rows.len() == mat.rows() && cols.len() == mat.cols() {
                return Ok(None);
            }
            let block = DMatrix::from_fn(rows.len(), cols.len(), |i, j| full[(rows[i], cols[j])]);
            let dec = svd(&block)?;
            let rank = dec.numerical_rank(RANK_TOL);
            if rank == 0 {
                return Ok(None);
            }
            let mut basis = Vec::with_capacity(rank * (rows.len() + cols.len()));
            for j in 0..rank {
                for &c in &cols {
                    basis.push(
                        rows.iter()
                            .enumerate()
                            .map(|(ir, &r)| (mat.flat_index(r, c), dec.u[(ir, j)]))
                            .collect(),
                    );
                }
                for &r in &rows {
                    basis.push(
                        cols.iter()
                            .enumerate()
                            .map(|(jc, &c)| (mat.flat_index(r, c), dec.v_t[(j, jc)]))
                            .collect(),
                    );
                }
            }
            let dim = rank * (rows.len() + cols.len() - rank);
            Ok(Some(Model { basis, dim }))
        }
        Kind::RankOneTensor => {
            let shape = x.shape().to_vec();
            let mut factors = Vec::with_capacity(shape.len());
            for mode in 0..shape.len() {
                let mat = Matricization::new(&shape, &Bipartition::new([mode])?)?;
                let dec = svd(&mat.to_matrix(x.data()))?;
                factors.push((0..shape[mode]).map(|i| dec.u[(i, 0)]).collect::<Vec<T>>());
            }
            let mut basis = Vec::new();
            for mode in 0..shape.len() {
                for j in 0..shape[mode] {
                    let mut col = Vec::with_capacity(x.len() / shape[mode]);
                    for_each_index(&shape, |flat, idx| {
                        if idx[mode] != j {
                            return;
                        }
                        let mut v = T::one();
                        for (m, f) in factors.iter().enumerate() {
                            if m != mode {
                                v *= f[idx[m]];
                            }
                        }
                        col.push((flat, v));
                    });
                    basis.push(col);
                }
            }
            let dim = shape.iter().sum::<usize>() + 1 - shape.len();
            Ok(Some(Model { basis, dim }))
        }
    }
}

/// Calls `f(flat, multi_index)` for every entry in row-major order.
fn for_each_index(shape: &[usize], mut f: impl FnMut(usize, &[usize])) {
    let total: usize = shape.iter().product();
    let mut idx = vec![0; shape.len()];
    for flat in 0..total {
        f(flat, &idx);
        for m in (0..shape.len()).rev() {
            idx[m] += 1;
            if idx[m] < shape[m] {
                break;
            }
            idx[m] = 0;
        }
    }
}

/// Least-squares solution of `A(B c) = y` mapped back to `B c`.
fn fit<T: Scalar>(
    a: &GaussianMeasurementMap<T>,
    y: &[T],
    model: &Model<T>,
    like: &DenseTensor<T>,
) -> Result<DenseTensor<T>> {
    let m = a.rows();
    let p = model.basis.len();
    let mat = a.matrix();
    let mut ab = DMatrix::<T>::zeros(m, p);
    for (j, col) in model.basis.iter().enumerate() {
        let mut target = ab.column_mut(j);
        for &(idx, v) in col {
            target.axpy(v, &mat.column(idx), T::one());
        }
    }
    let dec = svd(&ab)?;
    let cutoff = 1e-10 * dec.singular_values.first().copied().unwrap_or(0.0);
    let coef = dec.solve(y, cutoff);
    let mut out = vec![T::zero(); like.len()];
    for (col, c) in model.basis.iter().zip(coef.iter()) {
        for &(idx, v) in col {
            out[idx] += v * *c;
        }
    }
    Ok(DenseTensor::from_parts_unchecked(like.shape().to_vec(), out))
}
