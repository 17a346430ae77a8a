use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::tensor::check_shape;
use super::{DenseTensor, Scalar};
use crate::{Error, Result};

/// A set of tensor modes `b` that are merged into the row index of a
/// matricization. Modes are stored zero-based and sorted; the textual form is
/// one-based, e.g. `{1,2}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Bipartition {
    modes: Vec<usize>,
}

impl Bipartition {
    /// Zero-based modes, any order, duplicates rejected.
    pub fn new(modes: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut modes: Vec<usize> = modes.into_iter().collect();
        modes.sort_unstable();
        let len = modes.len();
        modes.dedup();
        if modes.is_empty() || modes.len() != len {
            return Err(Error::InvalidBipartition { modes, order: 0 });
        }
        Ok(Self { modes })
    }

    /// One-based modes as written in `nuc[1,2]`.
    pub fn from_one_based(modes: &[usize]) -> Result<Self> {
        if modes.contains(&0) {
            return Err(Error::InvalidBipartition {
                modes: modes.to_vec(),
                order: 0,
            });
        }
        Self::new(modes.iter().map(|m| m - 1))
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.modes.iter().map(|m| m + 1).collect()
    }

    /// Modes of the complement within `[order]`.
    pub fn complement(&self, order: usize) -> Vec<usize> {
        (0..order).filter(|m| !self.modes.contains(m)).collect()
    }

    /// Checks that `b` is a nonempty proper subset of the modes of an order-`order` tensor.
    pub fn validate(&self, order: usize) -> Result<()> {
        let proper = self.modes.len() < order && self.modes.iter().all(|&m| m < order);
        if !proper {
            return Err(Error::InvalidBipartition {
                modes: self.one_based(),
                order,
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for Bipartition {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::from_one_based(&v)
    }
}

impl From<Bipartition> for Vec<usize> {
    fn from(b: Bipartition) -> Self {
        b.one_based()
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(|m| m.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl FromStr for Bipartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches(['{', '[']).trim_end_matches(['}', ']']);
        let modes = inner
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad mode `{p}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_one_based(&modes)
    }
}

/// Ordered list of bipartitions `(b_j)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartitionSet {
    bipartitions: Vec<Bipartition>,
}

impl BipartitionSet {
    pub fn new(bipartitions: Vec<Bipartition>) -> Result<Self> {
        if bipartitions.is_empty() {
            return Err(Error::InvalidArgument("empty bipartition set".into()));
        }
        for (i, b) in bipartitions.iter().enumerate() {
            if bipartitions[..i].contains(b) {
                return Err(Error::InvalidArgument(format!("duplicate bipartition {b}")));
            }
        }
        Ok(Self { bipartitions })
    }

    fn from_lists(lists: &[&[usize]]) -> Self {
        let bipartitions = lists
            .iter()
            .map(|l| Bipartition::from_one_based(l).expect("static family"))
            .collect();
        Self { bipartitions }
    }

    /// `({i})` for every mode.
    pub fn hosvd(order: usize) -> Self {
        Self {
            bipartitions: (0..order).map(|i| Bipartition { modes: vec![i] }).collect(),
        }
    }

    /// `({1..l})` for `l < order`.
    pub fn tensor_train(order: usize) -> Self {
        Self {
            bipartitions: (1..order)
                .map(|l| Bipartition {
                    modes: (0..l).collect(),
                })
                .collect(),
        }
    }

    /// `({1,2}, {1,3})`.
    pub fn b2() -> Self {
        Self::from_lists(&[&[1, 2], &[1, 3]])
    }

    /// `({1,2}, {1,3}, {1,4})`.
    pub fn b3() -> Self {
        Self::from_lists(&[&[1, 2], &[1, 3], &[1, 4]])
    }

    /// `({1,2})`.
    pub fn square_deal() -> Self {
        Self::from_lists(&[&[1, 2]])
    }

    /// Named family: `tt`, `hosvd`, `b2`, `b3` or `square-deal`.
    pub fn named(name: &str, order: usize) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "tt" => Ok(Self::tensor_train(order)),
            "hosvd" => Ok(Self::hosvd(order)),
            "b2" => Ok(Self::b2()),
            "b3" => Ok(Self::b3()),
            "square-deal" | "squaredeal" | "square_deal" => Ok(Self::square_deal()),
            other => Err(Error::Parse(format!("unknown bipartition family `{other}`"))),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Bipartition> {
        self.bipartitions.iter()
    }

    pub fn len(&self) -> usize {
        self.bipartitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bipartitions.is_empty()
    }
}

/// Precomputed index map for the `b`-matricization of tensors of a fixed shape.
///
/// Modes in `b` (ascending) form the row multi-index and the remaining modes
/// (ascending) form the column multi-index, both in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Matricization {
    bipartition: Bipartition,
    shape: Vec<usize>,
    rows: usize,
    cols: usize,
    /// `perm[r * cols + c]` is the flat tensor index of matrix entry `(r, c)`.
    perm: Vec<usize>,
    identity: bool,
}

impl Matricization {
    pub fn new(shape: &[usize], b: &Bipartition) -> Result<Self> {
        check_shape(shape)?;
        let order = shape.len();
        b.validate(order)?;
        let row_modes = b.modes().to_vec();
        let col_modes = b.complement(order);

        let mut strides = vec![1usize; order];
        for i in (0..order.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * shape[i + 1];
        }
        let rows: usize = row_modes.iter().map(|&m| shape[m]).product();
        let cols: usize = col_modes.iter().map(|&m| shape[m]).product();

        let offsets = |modes: &[usize], count: usize| -> Vec<usize> {
            let mut out = Vec::with_capacity(count);
            let mut idx = vec![0usize; modes.len()];
            for _ in 0..count {
                out.push(idx.iter().zip(modes).map(|(&k, &m)| k * strides[m]).sum());
                for pos in (0..modes.len()).rev() {
                    idx[pos] += 1;
                    if idx[pos] < shape[modes[pos]] {
                        break;
                    }
                    idx[pos] = 0;
                }
            }
            out
        };
        let row_off = offsets(&row_modes, rows);
        let col_off = offsets(&col_modes, cols);
        let mut perm = Vec::with_capacity(rows * cols);
        for r in &row_off {
            for c in &col_off {
                perm.push(r + c);
            }
        }
        let identity = perm.iter().enumerate().all(|(i, &p)| i == p);
        Ok(Self {
            bipartition: b.clone(),
            shape: shape.to_vec(),
            rows,
            cols,
            perm,
            identity,
        })
    }

    pub fn bipartition(&self) -> &Bipartition {
        &self.bipartition
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Flat tensor index of matrix entry `(r, c)`.
    pub fn flat_index(&self, r: usize, c: usize) -> usize {
        self.perm[r * self.cols + c]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Matricization as a nalgebra matrix (column-major storage).
    pub fn to_matrix<T: Scalar>(&self, data: &[T]) -> DMatrix<T> {
        debug_assert_eq!(data.len(), self.perm.len());
        if self.identity {
            return DMatrix::from_row_slice(self.rows, self.cols, data);
        }
        DMatrix::from_fn(self.rows, self.cols, |r, c| data[self.perm[r * self.cols + c]])
    }

    /// Inverse of [`to_matrix`](Self::to_matrix), writing into a flat buffer.
    pub fn write_matrix<T: Scalar>(&self, m: &DMatrix<T>, out: &mut [T]) {
        debug_assert_eq!(m.shape(), (self.rows, self.cols));
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[self.perm[r * self.cols + c]] = m[(r, c)];
            }
        }
    }

    pub fn matricize<T: Scalar>(&self, t: &DenseTensor<T>) -> Result<DenseTensor<T>> {
        t.ensure_shape(&self.shape)?;
        let data = self.perm.iter().map(|&p| t.data()[p]).collect();
        Ok(DenseTensor::from_parts_unchecked(vec![self.rows, self.cols], data))
    }

    pub fn dematricize<T: Scalar>(&self, m: &DenseTensor<T>) -> Result<DenseTensor<T>> {
        m.ensure_shape(&[self.rows, self.cols])?;
        let mut data = vec![T::zero(); m.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            data[p] = m.data()[i];
        }
        Ok(DenseTensor::from_parts_unchecked(self.shape.clone(), data))
    }
}

/// `n_b × n_{b^c}` matricization of `t`.
pub fn matricize<T: Scalar>(t: &DenseTensor<T>, b: &Bipartition) -> Result<DenseTensor<T>> {
    Matricization::new(t.shape(), b)?.matricize(t)
}

/// Restores the tensor of shape `shape` from its `b`-matricization.
pub fn dematricize<T: Scalar>(
    m: &DenseTensor<T>,
    b: &Bipartition,
    shape: &[usize],
) -> Result<DenseTensor<T>> {
    Matricization::new(shape, b)?.dematricize(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sample_gaussian, svd};

    #[test]
    fn matricize_shape_joins_modes() {
        let t = sample_gaussian::<f64>(&[2, 3, 4, 5], 1);
        let b = Bipartition::from_one_based(&[1, 2]).unwrap();
        let m = matricize(&t, &b).unwrap();
        assert_eq!(m.shape(), &[6, 20]);
        // (i1,i2,i3,i4) -> row i1*3+i2, col i3*5+i4
        assert_eq!(m.get(&[1 * 3 + 2, 3 * 5 + 4]), t.get(&[1, 2, 3, 4]));
    }

    #[test]
    fn non_contiguous_bipartition_orders_modes_ascending() {
        let t = sample_gaussian::<f64>(&[2, 3, 4], 2);
        let b = Bipartition::from_one_based(&[1, 3]).unwrap();
        let m = matricize(&t, &b).unwrap();
        assert_eq!(m.shape(), &[8, 3]);
        assert_eq!(m.get(&[1 * 4 + 2, 1]), t.get(&[1, 1, 2]));
    }

    #[test]
    fn rejects_empty_and_full_bipartitions() {
        let t = sample_gaussian::<f64>(&[2, 3], 3);
        assert!(Bipartition::new(Vec::<usize>::new()).is_err());
        let full = Bipartition::new([0, 1]).unwrap();
        assert!(matches!(
            matricize(&t, &full),
            Err(Error::InvalidBipartition { .. })
        ));
        let out_of_range = Bipartition::new([2]).unwrap();
        assert!(matricize(&t, &out_of_range).is_err());
    }

    #[test]
    fn round_trip_all_bipartitions() {
        let shape = [2, 3, 2, 2];
        let t = sample_gaussian::<f64>(&shape, 4);
        for mask in 1u32..15 {
            let b = Bipartition::new((0..4).filter(|i| mask & (1 << i) != 0)).unwrap();
            let m = matricize(&t, &b).unwrap();
            assert_eq!(dematricize(&m, &b, &shape).unwrap(), t);
            assert!((m.frobenius_norm() - t.frobenius_norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_tensor_matricizes_to_outer_product() {
        let x = [1.0, -2.0];
        let y = [0.5, 1.0, 3.0];
        let z = [2.0, -1.0];
        let mut data = Vec::new();
        for a in x {
            for b in y {
                for c in z {
                    data.push(a * b * c);
                }
            }
        }
        let t = DenseTensor::<f64>::from_real(vec![2, 3, 2], &data).unwrap();
        let b = Bipartition::from_one_based(&[1]).unwrap();
        let m = matricize(&t, &b).unwrap();
        for (i, a) in x.iter().enumerate() {
            for (j, bb) in y.iter().enumerate() {
                for (k, c) in z.iter().enumerate() {
                    assert_eq!(m.get(&[i, j * 2 + k]), a * bb * c);
                }
            }
        }
        let s = svd(&m.to_matrix().unwrap()).unwrap();
        assert!(s.singular_values[1] < 1e-12 * s.singular_values[0]);
    }

    #[test]
    fn families() {
        assert_eq!(BipartitionSet::tensor_train(4).len(), 3);
        assert_eq!(BipartitionSet::hosvd(4).len(), 4);
        assert_eq!(
            BipartitionSet::b3().iter().map(|b| b.to_string()).collect::<Vec<_>>(),
            vec!["{1,2}", "{1,3}", "{1,4}"]
        );
        assert!(BipartitionSet::new(vec![
            Bipartition::new([0]).unwrap(),
            Bipartition::new([0]).unwrap()
        ])
        .is_err());
        assert_eq!("{1,3}".parse::<Bipartition>().unwrap().modes(), &[0, 2]);
    }
}
