use nalgebra::DMatrix;

use super::Scalar;
use crate::{Error, Result};

/// Thin SVD `M = U diag(σ) V^H` with singular values in descending order.
#[derive(Debug, Clone)]
pub struct Svd<T: Scalar> {
    pub u: DMatrix<T>,
    pub singular_values: Vec<f64>,
    /// `V^H`.
    pub v_t: DMatrix<T>,
}

impl<T: Scalar> Svd<T> {
    /// `U diag(values) V^H` for replacement singular values.
    pub fn reassemble(&self, values: &[f64]) -> DMatrix<T> {
        let mut us = self.u.clone();
        for (j, &s) in values.iter().enumerate() {
            us.column_mut(j).iter_mut().for_each(|v| *v = v.mul_real(s));
        }
        us * &self.v_t
    }

    /// Number of singular values above `rel_tol * σ₁`.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        let top = self.singular_values.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        self.singular_values
            .iter()
            .take_while(|&&s| s > rel_tol * top)
            .count()
    }

    /// Least-squares solution `V diag(1/σ) U^H b`, dropping `σ ≤ cutoff`.
    pub fn solve(&self, b: &[T], cutoff: f64) -> Vec<T> {
        let k = self.singular_values.len();
        let mut coef = vec![T::zero(); k];
        for (j, c) in coef.iter_mut().enumerate() {
            let s = self.singular_values[j];
            if s > cutoff {
                let dot = self.u.column(j).iter().zip(b).fold(T::zero(), |acc, (u, v)| acc + u.conjugate() * *v);
                *c = dot.unscale(s);
            }
        }
        (0..self.v_t.ncols())
            .map(|i| (0..k).fold(T::zero(), |acc, j| acc + self.v_t[(j, i)].conjugate() * coef[j]))
            .collect()
    }
}

fn check_finite<T: Scalar>(m: &DMatrix<T>) -> Result<()> {
    if m.iter()
        .any(|v| !v.re_part().is_finite() || !v.im_part().is_finite())
    {
        return Err(Error::NumericalFailure("SVD input has non-finite entries".into()));
    }
    Ok(())
}

pub fn svd<T: Scalar>(m: &DMatrix<T>) -> Result<Svd<T>> {
    check_finite(m)?;
    T::thin_svd(m).ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))
}

/// Singular values only, descending.
pub fn singular_values<T: Scalar>(m: &DMatrix<T>) -> Result<Vec<f64>> {
    check_finite(m)?;
    T::singular_values_only(m).ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))
}

pub(crate) fn faer_thin_svd<T>(m: &DMatrix<T>) -> Option<Svd<T>>
where
    T: Scalar + faer::traits::ComplexField<Real = f64>,
{
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return Some(Svd { u: DMatrix::zeros(r, 0), singular_values: Vec::new(), v_t: DMatrix::zeros(0, c) });
    }
    let fm = faer::Mat::<T>::from_fn(r, c, |i, j| m[(i, j)]);
    let dec = fm.thin_svd().ok()?;
    let (u, s, v) = (dec.U(), dec.S().column_vector(), dec.V());
    Some(Svd {
        u: DMatrix::from_fn(r, k, |i, j| u[(i, j)]),
        singular_values: (0..k).map(|j| Scalar::re_part(s[j])).collect(),
        v_t: DMatrix::from_fn(k, c, |i, j| nalgebra::ComplexField::conjugate(v[(j, i)])),
    })
}

pub(crate) fn faer_singular_values<T>(m: &DMatrix<T>) -> Option<Vec<f64>>
where
    T: Scalar + faer::traits::ComplexField<Real = f64>,
{
    let (r, c) = m.shape();
    if r.min(c) == 0 {
        return Some(Vec::new());
    }
    let fm = faer::Mat::<T>::from_fn(r, c, |i, j| m[(i, j)]);
    let values = fm.singular_values().ok()?;
    Some(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sample_gaussian;
    use num_complex::Complex64;

    fn residual<T: Scalar>(m: &DMatrix<T>) -> f64 {
        let s = svd(m).unwrap();
        (s.reassemble(&s.singular_values) - m).norm() / m.norm()
    }

    #[test]
    fn identity_and_diagonal() {
        let s = svd(&DMatrix::<f64>::identity(3, 3)).unwrap();
        for v in &s.singular_values {
            assert!((v - 1.0).abs() < 1e-14);
        }
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        let s = svd(&d).unwrap();
        assert!((s.singular_values[0] - 3.0).abs() < 1e-14);
        assert!((s.singular_values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_residual_real_and_complex() {
        let m = sample_gaussian::<f64>(&[8, 5], 11).to_matrix().unwrap();
        assert!(residual(&m) <= 1e-10);
        let m = sample_gaussian::<Complex64>(&[5, 8], 12).to_matrix().unwrap();
        assert!(residual(&m) <= 1e-10);
        let s = svd(&m).unwrap();
        assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        assert!(s.singular_values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn unitary_invariance() {
        let m = sample_gaussian::<Complex64>(&[6, 4], 13).to_matrix().unwrap();
        let q = svd(&sample_gaussian::<Complex64>(&[6, 6], 14).to_matrix().unwrap())
            .unwrap()
            .u;
        let before = singular_values(&m).unwrap();
        let after = singular_values(&(q * &m)).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn rank_deficient_input() {
        let a = sample_gaussian::<f64>(&[6, 2], 21).to_matrix().unwrap();
        let b = sample_gaussian::<f64>(&[2, 6], 22).to_matrix().unwrap();
        for m in [&a * &b, (&a * &b).transpose()] {
            assert!(residual(&m) <= 1e-12);
        }
        let a = sample_gaussian::<Complex64>(&[7, 3], 23).to_matrix().unwrap();
        let b = sample_gaussian::<Complex64>(&[3, 5], 24).to_matrix().unwrap();
        let s = svd(&(&a * &b)).unwrap();
        assert!(residual(&(&a * &b)) <= 1e-12);
        assert_eq!(s.numerical_rank(1e-10), 3);
    }

    #[test]
    fn least_squares_solve() {
        let m = sample_gaussian::<f64>(&[6, 3], 25).to_matrix().unwrap();
        let x = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (&m * nalgebra::DVector::from_column_slice(&x)).iter().copied().collect();
        let sol = svd(&m).unwrap().solve(&b, 1e-12);
        for (u, v) in sol.iter().zip(&x) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn non_finite_input_is_a_numerical_failure() {
        let m = DMatrix::from_row_slice(1, 2, &[1.0, f64::INFINITY]);
        assert!(matches!(svd(&m), Err(Error::NumericalFailure(_))));
    }
}
