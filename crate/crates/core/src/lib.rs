//! Convex recovery of simultaneously structured signals with weighted sums and
//! weighted maxima of norms, Monte-Carlo statistical dimensions of descent
//! cones, and closed-form lower bounds on the number of Gaussian measurements.

pub mod bounds;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod regularizers;
pub mod signals;
pub mod solver;
pub mod statdim;

pub use error::{Error, Result};
pub use linalg::{Bipartition, BipartitionSet, DenseTensor, Field, Scalar};
