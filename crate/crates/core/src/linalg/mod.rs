//! Dense tensors, matricizations, SVD and seeded Gaussian sampling.

mod matricize;
mod random;
mod scalar;
mod svd;
mod tensor;

pub use matricize::{dematricize, matricize, Bipartition, BipartitionSet, Matricization};
pub use random::{derive_seed, gaussian_with, rng_from_seed, sample_gaussian, SeededRng};
pub use scalar::{Field, Scalar};
pub use svd::{singular_values, svd, Svd};
pub use tensor::DenseTensor;

pub(crate) use tensor::{axpy, norm2, real_inner};
