use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DenseTensor, Scalar};

/// Deterministic generator used everywhere randomness is needed.
pub type SeededRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with a path of indices (bin, trial, sample, ...) into an
/// independent stream seed. Results do not depend on evaluation order.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &k| splitmix64(acc ^ splitmix64(k.wrapping_add(0x5851_f42d_4c95_7f2d))))
}

pub fn rng_from_seed(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

/// Tensor with iid standard (complex-)normal entries drawn from `rng`.
pub fn gaussian_with<T: Scalar>(shape: &[usize], rng: &mut SeededRng) -> DenseTensor<T> {
    let len = shape.iter().product();
    let data = (0..len).map(|_| T::sample_standard(rng)).collect();
    DenseTensor::from_parts_unchecked(shape.to_vec(), data)
}

/// Tensor with iid standard normal entries; `Complex64` entries are CN(0, 1)
/// with real and imaginary parts each N(0, 1/2). Same seed, same tensor.
pub fn sample_gaussian<T: Scalar>(shape: &[usize], seed: u64) -> DenseTensor<T> {
    gaussian_with(shape, &mut rng_from_seed(seed))
}
