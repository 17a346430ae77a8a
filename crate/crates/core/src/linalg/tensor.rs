use nalgebra::DMatrix;

use super::Scalar;
use crate::{Error, Result};

/// Dense multi-index array stored in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<T: Scalar = f64> {
    shape: Vec<usize>,
    data: Vec<T>,
}

pub(crate) fn check_shape(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() || shape.iter().any(|&n| n == 0) {
        return Err(Error::InvalidShape(shape.to_vec()));
    }
    Ok(shape.iter().product())
}

impl<T: Scalar> DenseTensor<T> {
    /// Builds a tensor, rejecting inconsistent lengths and non-finite entries.
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let len = check_shape(&shape)?;
        if data.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.re_part().is_finite() || !v.im_part().is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { shape, data })
    }

    pub(crate) fn from_parts_unchecked(shape: Vec<usize>, data: Vec<T>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data }
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        let len = check_shape(shape)?;
        Ok(Self {
            shape: shape.to_vec(),
            data: vec![T::zero(); len],
        })
    }

    pub fn from_real(shape: Vec<usize>, data: &[f64]) -> Result<Self> {
        Self::new(shape, data.iter().map(|&v| T::from_re(v)).collect())
    }

    /// Row-major `rows × cols` matrix from a nalgebra matrix.
    pub fn from_matrix(m: &DMatrix<T>) -> Self {
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(m[(i, j)]);
            }
        }
        Self {
            shape: vec![rows, cols],
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Same data, new shape with the same number of entries.
    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        let len = check_shape(&shape)?;
        if len != self.data.len() {
            return Err(Error::LengthMismatch {
                expected: self.data.len(),
                found: len,
            });
        }
        Ok(Self {
            shape,
            data: self.data,
        })
    }

    /// Entry at a multi-index.
    pub fn get(&self, index: &[usize]) -> T {
        let mut flat = 0;
        for (i, (&k, &n)) in index.iter().zip(&self.shape).enumerate() {
            assert!(k < n, "index {k} out of range for mode {i}");
            flat = flat * n + k;
        }
        self.data[flat]
    }

    /// Row-major order-2 tensor as a nalgebra matrix.
    pub fn to_matrix(&self) -> Result<DMatrix<T>> {
        if self.order() != 2 {
            return Err(Error::InvalidArgument(format!(
                "expected an order-2 tensor, found order {}",
                self.order()
            )));
        }
        Ok(DMatrix::from_row_slice(self.shape[0], self.shape[1], &self.data))
    }

    pub fn ensure_shape(&self, shape: &[usize]) -> Result<()> {
        if self.shape != shape {
            return Err(Error::ShapeMismatch {
                expected: shape.to_vec(),
                found: self.shape.clone(),
            });
        }
        Ok(())
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs_val()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs_val()))
    }

    /// Real part of the Hilbert-Schmidt inner product `Re tr(self^H other)`.
    pub fn real_inner(&self, other: &Self) -> f64 {
        real_inner(&self.data, &other.data)
    }

    /// Hilbert-Schmidt inner product `tr(self^H other)`.
    pub fn inner(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (a, b)| acc + a.conjugate() * *b)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| v.mul_real(a)).collect(),
        }
    }

    pub fn scaled_by(&self, a: T) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| v * a).collect(),
        }
    }

    /// `self + a * other`.
    pub fn add_scaled(&self, a: f64, other: &Self) -> Self {
        let mut out = self.clone();
        axpy(a, &other.data, &mut out.data);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(-1.0, other)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(1.0, other)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).abs_sq())
            .sum::<f64>()
            .sqrt()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

pub(crate) fn norm2<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|x| x.abs_sq()).sum::<f64>().sqrt()
}

pub(crate) fn real_inner<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.real_dot(*y)).sum()
}

/// `y += a * x`.
pub(crate) fn axpy<T: Scalar>(a: f64, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi.mul_real(a);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn rejects_bad_lengths_and_non_finite() {
        assert!(matches!(
            DenseTensor::<f64>::new(vec![2, 2], vec![1.0; 3]),
            Err(Error::LengthMismatch { .. })
        ));
        assert_eq!(
            DenseTensor::<f64>::new(vec![2], vec![1.0, f64::NAN]),
            Err(Error::NonFinite)
        );
        assert!(DenseTensor::<f64>::zeros(&[2, 0]).is_err());
    }

    #[test]
    fn matrix_round_trip_is_row_major() {
        let t = DenseTensor::<f64>::from_real(vec![2, 3], &[1., 2., 3., 4., 5., 6.]).unwrap();
        let m = t.to_matrix().unwrap();
        assert_eq!(m[(0, 2)], 3.0);
        assert_eq!(m[(1, 0)], 4.0);
        assert_eq!(DenseTensor::from_matrix(&m), t);
        assert_eq!(t.get(&[1, 1]), 5.0);
    }

    #[test]
    fn complex_inner_product_is_conjugate_linear_in_first_slot() {
        let i = Complex64::new(0.0, 1.0);
        let a = DenseTensor::new(vec![1], vec![i]).unwrap();
        let b = DenseTensor::new(vec![1], vec![Complex64::new(1.0, 0.0)]).unwrap();
        assert_eq!(a.inner(&b), -i);
        assert_eq!(a.real_inner(&a), 1.0);
    }
}
