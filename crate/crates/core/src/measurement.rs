//! Dense Gaussian measurement maps `x ↦ (⟨a_i, x⟩)_i`.

use nalgebra::{Cholesky, DMatrix, DVector, DVectorView, Dyn};

use crate::linalg::{rng_from_seed, DenseTensor, Scalar};
use crate::{Error, Result};

/// `m × d` matrix whose `i`-th row holds `conj(a_i)`, so that `A x` gives
/// `⟨a_i, x⟩ = a_i^H x`. The Cholesky factor of `A A^H` is computed once.
#[derive(Debug, Clone)]
pub struct GaussianMeasurementMap<T: Scalar = f64> {
    shape: Vec<usize>,
    matrix: DMatrix<T>,
    gram: Option<Cholesky<T, Dyn>>,
    seed: Option<u64>,
}

impl<T: Scalar> GaussianMeasurementMap<T> {
    /// `m` measurements with iid standard (complex-)normal entries.
    pub fn new(m: usize, shape: &[usize], seed: u64) -> Result<Self> {
        let d = crate::linalg::DenseTensor::<T>::zeros(shape)?.len();
        let mut rng = rng_from_seed(seed);
        // Draw row by row so a map with more rows extends one with fewer.
        let mut rows = Vec::with_capacity(m * d);
        for _ in 0..m * d {
            rows.push(T::sample_standard(&mut rng));
        }
        let matrix = DMatrix::from_row_slice(m, d, &rows);
        let mut map = Self::from_matrix(matrix, shape)?;
        map.seed = Some(seed);
        Ok(map)
    }

    /// Wraps an explicit `m × d` matrix (rows are `conj(a_i)`).
    pub fn from_matrix(matrix: DMatrix<T>, shape: &[usize]) -> Result<Self> {
        let d = crate::linalg::DenseTensor::<T>::zeros(shape)?.len();
        if matrix.ncols() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                found: matrix.ncols(),
            });
        }
        let gram = if matrix.nrows() == 0 || matrix.nrows() > d {
            None
        } else {
            Cholesky::new(&matrix * matrix.adjoint())
        };
        Ok(Self {
            shape: shape.to_vec(),
            matrix,
            gram,
            seed: None,
        })
    }

    /// Same map scaled by `c` (e.g. `1/√m` for near-isometries).
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let mut out = Self::from_matrix(self.matrix.map(|v| v.mul_real(c)), &self.shape)?;
        out.seed = self.seed;
        Ok(out)
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn apply(&self, x: &DenseTensor<T>) -> Result<Vec<T>> {
        x.ensure_shape(&self.shape)?;
        Ok(self.apply_slice(x.data()))
    }

    /// `Σ_i y_i a_i` reshaped to the domain shape.
    pub fn adjoint(&self, y: &[T]) -> Result<DenseTensor<T>> {
        self.check_len(y)?;
        Ok(DenseTensor::from_parts_unchecked(
            self.shape.clone(),
            self.adjoint_slice(y),
        ))
    }

    /// `argmin ‖z − x‖ s.t. A(z) = y`, i.e. `x − A^H (A A^H)^{-1} (A x − y)`.
    pub fn affine_project(&self, y: &[T], x: &DenseTensor<T>) -> Result<DenseTensor<T>> {
        x.ensure_shape(&self.shape)?;
        self.check_len(y)?;
        let mut z = x.data().to_vec();
        self.project_in_place(y, &mut z)?;
        Ok(DenseTensor::from_parts_unchecked(self.shape.clone(), z))
    }

    /// Minimum-norm solution of `A(x) = y`.
    pub fn least_norm_solution(&self, y: &[T]) -> Result<DenseTensor<T>> {
        let zero = DenseTensor::zeros(&self.shape)?;
        self.affine_project(y, &zero)
    }

    fn check_len(&self, y: &[T]) -> Result<()> {
        if y.len() != self.rows() {
            return Err(Error::LengthMismatch {
                expected: self.rows(),
                found: y.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn apply_slice(&self, x: &[T]) -> Vec<T> {
        if self.rows() == 0 {
            return Vec::new();
        }
        let xv = DVectorView::from_slice(x, x.len());
        (&self.matrix * xv).data.into()
    }

    pub(crate) fn adjoint_slice(&self, y: &[T]) -> Vec<T> {
        if self.rows() == 0 {
            return vec![T::zero(); self.dim()];
        }
        let yv = DVectorView::from_slice(y, y.len());
        self.matrix.ad_mul(&yv).data.into()
    }

    pub(crate) fn project_in_place(&self, y: &[T], z: &mut [T]) -> Result<()> {
        self.project_passes(y, z, 2)
    }

    pub(crate) fn project_passes(&self, y: &[T], z: &mut [T], passes: usize) -> Result<()> {
        if self.rows() == 0 {
            return Ok(());
        }
        let chol = self.gram.as_ref().ok_or_else(|| {
            Error::DegenerateMap(format!(
                "A A^H is not positive definite (m = {}, d = {})",
                self.rows(),
                self.dim()
            ))
        })?;
        // A second pass (iterative refinement) keeps the residual at roundoff level.
        for _ in 0..passes {
            let ax = self.apply_slice(z);
            let r = DVector::from_iterator(ax.len(), ax.iter().zip(y).map(|(a, b)| *a - *b));
            let w = chol.solve(&r);
            let corr = self.matrix.ad_mul(&w);
            for (zi, ci) in z.iter_mut().zip(corr.iter()) {
                *zi -= *ci;
            }
        }
        Ok(())
    }

    /// `‖A(x) − y‖₂`.
    pub fn residual_norm(&self, x: &[T], y: &[T]) -> f64 {
        self.apply_slice(x)
            .iter()
            .zip(y)
            .map(|(a, b)| (*a - *b).abs_sq())
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm2, sample_gaussian};
    use num_complex::Complex64;

    fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
        a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.conjugate() * *y)
    }

    #[test]
    fn apply_is_linear_and_zero_preserving() {
        let a = GaussianMeasurementMap::<f64>::new(5, &[3, 4], 1).unwrap();
        let zero = DenseTensor::zeros(&[3, 4]).unwrap();
        assert!(a.apply(&zero).unwrap().iter().all(|v| *v == 0.0));
        let x = sample_gaussian::<f64>(&[3, 4], 2);
        let y1 = a.apply(&x.scaled(2.5)).unwrap();
        let y2 = a.apply(&x).unwrap();
        for (u, v) in y1.iter().zip(&y2) {
            assert!((u - 2.5 * v).abs() < 1e-12);
        }
        assert!(a.apply(&sample_gaussian::<f64>(&[4, 3], 3)).is_err());
    }

    #[test]
    fn adjoint_identity_complex() {
        let a = GaussianMeasurementMap::<Complex64>::new(7, &[3, 4], 3).unwrap();
        for k in 0..10 {
            let x = sample_gaussian::<Complex64>(&[3, 4], 10 + k);
            let y = sample_gaussian::<Complex64>(&[7], 20 + k);
            let lhs = dot(&a.apply(&x).unwrap(), y.data());
            let rhs = dot(x.data(), a.adjoint(y.data()).unwrap().data());
            assert!((lhs - rhs).norm() < 1e-10);
        }
        assert!(a.adjoint(&[Complex64::new(0.0, 0.0); 3]).is_err());
        assert!(a
            .adjoint(&[Complex64::new(0.0, 0.0); 7])
            .unwrap()
            .data()
            .iter()
            .all(|v| v.norm() == 0.0));
    }

    #[test]
    fn adjoint_of_unit_row() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let a = GaussianMeasurementMap::from_matrix(m, &[3]).unwrap();
        assert_eq!(a.adjoint(&[2.5]).unwrap().data(), &[2.5, 0.0, 0.0]);
    }

    #[test]
    fn normal_operator_matches_dense_product() {
        let a = GaussianMeasurementMap::<f64>::new(6, &[2, 5], 4).unwrap();
        let x = sample_gaussian::<f64>(&[2, 5], 5);
        let via_ops = a.adjoint(&a.apply(&x).unwrap()).unwrap();
        let dense = a.matrix().transpose() * a.matrix() * DVector::from_column_slice(x.data());
        for (u, v) in via_ops.data().iter().zip(dense.iter()) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn projection_properties() {
        let a = GaussianMeasurementMap::<Complex64>::new(12, &[4, 5], 6).unwrap();
        let x0 = sample_gaussian::<Complex64>(&[4, 5], 7);
        let y = a.apply(&x0).unwrap();
        // Feasible point is a fixed point.
        let z0 = a.affine_project(&y, &x0).unwrap();
        assert!(z0.distance(&x0) < 1e-10 * x0.frobenius_norm());

        let x = sample_gaussian::<Complex64>(&[4, 5], 8);
        let z = a.affine_project(&y, &x).unwrap();
        assert!(a.residual_norm(z.data(), &y) <= 1e-9 * norm2(&y));
        let zz = a.affine_project(&y, &z).unwrap();
        assert!(zz.distance(&z) < 1e-9 * z.frobenius_norm());

        // z - x is orthogonal to the null space of A.
        let zero_y = vec![Complex64::new(0.0, 0.0); 12];
        for k in 0..5 {
            let w = a
                .affine_project(&zero_y, &sample_gaussian::<Complex64>(&[4, 5], 30 + k))
                .unwrap();
            assert!(z.sub(&x).inner(&w).norm() < 1e-9 * w.frobenius_norm() * z.frobenius_norm());
        }
    }

    #[test]
    fn square_map_has_unique_feasible_point() {
        let a = GaussianMeasurementMap::<f64>::new(9, &[3, 3], 9).unwrap();
        let x0 = sample_gaussian::<f64>(&[3, 3], 10);
        let y = a.apply(&x0).unwrap();
        let z = a.affine_project(&y, &sample_gaussian::<f64>(&[3, 3], 11)).unwrap();
        assert!(z.distance(&x0) < 1e-8 * x0.frobenius_norm());
    }

    #[test]
    fn overcomplete_and_empty_maps() {
        let a = GaussianMeasurementMap::<f64>::new(5, &[4], 12).unwrap();
        let x = sample_gaussian::<f64>(&[4], 13);
        let y = a.apply(&x).unwrap();
        assert!(matches!(a.affine_project(&y, &x), Err(Error::DegenerateMap(_))));
        let empty = GaussianMeasurementMap::<f64>::new(0, &[4], 14).unwrap();
        assert_eq!(empty.affine_project(&[], &x).unwrap(), x);
        assert!(empty.apply(&x).unwrap().is_empty());
    }
}
