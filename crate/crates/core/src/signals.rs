//! Structured signal generators and an empirical RIP-deviation estimator.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::linalg::{derive_seed, rng_from_seed, DenseTensor, Field, Scalar};
use crate::measurement::GaussianMeasurementMap;
use crate::{Error, Result};

/// Matrices `Σᵢ₌₁ʳ xᵢyᵢᴴ` with `s₁`-sparse `xᵢ ∈ 𝕂ⁿ¹` and `s₂`-sparse `yᵢ ∈ 𝕂ⁿ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseLowRankModel {
    pub n1: usize,
    pub n2: usize,
    pub r: usize,
    pub s1: usize,
    pub s2: usize,
    #[serde(default)]
    pub field: Field,
}

impl SparseLowRankModel {
    pub fn new(n1: usize, n2: usize, r: usize, s1: usize, s2: usize, field: Field) -> Result<Self> {
        let model = Self { n1, n2, r, s1, s2, field };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0 || self.n2 == 0 || self.r == 0 || self.s1 == 0 || self.s2 == 0 {
            return Err(Error::InvalidModel(format!("all parameters must be positive: {self:?}")));
        }
        if self.s1 > self.n1 || self.s2 > self.n2 {
            return Err(Error::InvalidModel(format!("sparsity exceeds dimension: {self:?}")));
        }
        Ok(())
    }

    pub fn shape(&self) -> [usize; 2] {
        [self.n1, self.n2]
    }
}

/// Tensor products `x⁽¹⁾ ⊗ … ⊗ x⁽ᴸ⁾`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOneTensorModel {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub field: Field,
}

impl RankOneTensorModel {
    pub fn new(dims: Vec<usize>, field: Field) -> Result<Self> {
        let model = Self { dims, field };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.len() < 2 || self.dims.contains(&0) {
            return Err(Error::InvalidModel(format!("need order ≥ 2 and positive dims, got {:?}", self.dims)));
        }
        Ok(())
    }
}

/// Draws a model element; the scalar type `T` fixes the field.
pub fn sample_sparse_lowrank<T: Scalar>(model: &SparseLowRankModel, seed: u64) -> Result<DenseTensor<T>> {
    model.validate()?;
    let mut rng = rng_from_seed(seed);
    let (n1, n2) = (model.n1, model.n2);
    let mut data = vec![T::zero(); n1 * n2];
    for _ in 0..model.r {
        let rows = sample(&mut rng, n1, model.s1);
        let xs: Vec<(usize, T)> = rows.iter().map(|i| (i, T::sample_standard(&mut rng))).collect();
        let cols = sample(&mut rng, n2, model.s2);
        let ys: Vec<(usize, T)> = cols.iter().map(|j| (j, T::sample_standard(&mut rng))).collect();
        for &(i, xi) in &xs {
            for &(j, yj) in &ys {
                data[i * n2 + j] += xi * yj.conjugate();
            }
        }
    }
    DenseTensor::new(vec![n1, n2], data)
}

/// Gaussian factors of a rank-one tensor.
pub fn sample_rank1_factors<T: Scalar>(model: &RankOneTensorModel, seed: u64) -> Result<Vec<Vec<T>>> {
    model.validate()?;
    let mut rng = rng_from_seed(seed);
    Ok(model
        .dims
        .iter()
        .map(|&n| (0..n).map(|_| T::sample_standard(&mut rng)).collect())
        .collect())
}

/// Outer product of the given factors, row-major.
pub fn outer_product<T: Scalar>(factors: &[Vec<T>]) -> Result<DenseTensor<T>> {
    let mut data = vec![T::one()];
    for f in factors {
        data = data.iter().flat_map(|a| f.iter().map(move |b| *a * *b)).collect();
    }
    DenseTensor::new(factors.iter().map(Vec::len).collect(), data)
}

pub fn sample_rank1_tensor<T: Scalar>(model: &RankOneTensorModel, seed: u64) -> Result<DenseTensor<T>> {
    outer_product(&sample_rank1_factors::<T>(model, seed)?)
}

/// `max |‖A(X)‖² − 1|` over `n_samples` unit-Frobenius model elements, a lower
/// estimate of the restricted isometry constant of `A` on the model.
///
/// Sample `k` uses seed `derive_seed(seed, [k])`. Gaussian maps should be
/// normalized by `1/√m` beforehand.
pub fn empirical_rip_deviation<T: Scalar>(
    a: &GaussianMeasurementMap<T>,
    model: &SparseLowRankModel,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    if a.shape() != model.shape() {
        return Err(Error::ShapeMismatch { expected: model.shape().to_vec(), found: a.shape().to_vec() });
    }
    let mut worst: f64 = 0.0;
    for k in 0..n_samples as u64 {
        let x = sample_sparse_lowrank::<T>(model, derive_seed(seed, &[k]))?;
        let norm = x.frobenius_norm();
        if norm == 0.0 {
            continue;
        }
        let x = x.scaled(1.0 / norm);
        let energy: f64 = a.apply(&x)?.iter().map(|v| v.abs_sq()).sum();
        worst = worst.max((energy - 1.0).abs());
    }
    Ok(worst)
}
