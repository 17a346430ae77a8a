use std::fmt;

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::svd::{faer_singular_values, faer_thin_svd, Svd};

/// Scalar field of a signal space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    #[default]
    Real,
    Complex,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

impl std::str::FromStr for Field {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "real" | "r" => Ok(Field::Real),
            "complex" | "c" => Ok(Field::Complex),
            other => Err(crate::Error::Parse(format!("unknown field `{other}`"))),
        }
    }
}

/// Entry type of a [`DenseTensor`](super::DenseTensor): `f64` or `Complex64`.
pub trait Scalar:
    ComplexField<RealField = f64> + Copy + Send + Sync + fmt::Debug + Default + 'static
{
    const FIELD: Field;

    fn from_parts(re: f64, im: f64) -> Self;

    fn re_part(self) -> f64;

    fn im_part(self) -> f64;

    /// Draws a standard normal value; complex values are CN(0, 1).
    fn sample_standard<R: Rng + ?Sized>(rng: &mut R) -> Self;

    #[doc(hidden)]
    fn thin_svd(m: &DMatrix<Self>) -> Option<Svd<Self>>;

    #[doc(hidden)]
    fn singular_values_only(m: &DMatrix<Self>) -> Option<Vec<f64>>;

    fn abs_val(self) -> f64 {
        self.modulus()
    }

    fn abs_sq(self) -> f64 {
        self.modulus_squared()
    }

    /// Re(conj(self) * other).
    fn real_dot(self, other: Self) -> f64 {
        self.re_part() * other.re_part() + self.im_part() * other.im_part()
    }

    fn mul_real(self, a: f64) -> Self {
        self.scale(a)
    }

    fn from_re(a: f64) -> Self {
        Self::from_real(a)
    }

    /// `self / |self|`, or zero.
    fn unit_phase(self) -> Self {
        let m = self.modulus();
        if m > 0.0 {
            self.unscale(m)
        } else {
            Self::zero()
        }
    }
}

impl Scalar for f64 {
    fn thin_svd(m: &DMatrix<Self>) -> Option<Svd<Self>> {
        faer_thin_svd(m)
    }

    fn singular_values_only(m: &DMatrix<Self>) -> Option<Vec<f64>> {
        faer_singular_values(m)
    }

    const FIELD: Field = Field::Real;

    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }

    fn re_part(self) -> f64 {
        self
    }

    fn im_part(self) -> f64 {
        0.0
    }

    fn sample_standard<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn abs_val(self) -> f64 {
        self.abs()
    }

    fn abs_sq(self) -> f64 {
        self * self
    }

    fn real_dot(self, other: Self) -> f64 {
        self * other
    }

    fn mul_real(self, a: f64) -> Self {
        self * a
    }
}

impl Scalar for Complex64 {
    fn thin_svd(m: &DMatrix<Self>) -> Option<Svd<Self>> {
        faer_thin_svd(m)
    }

    fn singular_values_only(m: &DMatrix<Self>) -> Option<Vec<f64>> {
        faer_singular_values(m)
    }

    const FIELD: Field = Field::Complex;

    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }

    fn re_part(self) -> f64 {
        self.re
    }

    fn im_part(self) -> f64 {
        self.im
    }

    fn sample_standard<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    fn abs_sq(self) -> f64 {
        self.norm_sqr()
    }

    fn mul_real(self, a: f64) -> Self {
        Complex64::new(self.re * a, self.im * a)
    }
}
