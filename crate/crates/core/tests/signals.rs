use nalgebra::DMatrix;
use num_complex::Complex64;

use multireg_core::linalg::{singular_values, svd, Bipartition, Matricization};
use multireg_core::measurement::GaussianMeasurementMap;
use multireg_core::regularizers::NormAtom;
use multireg_core::signals::{
    empirical_rip_deviation, sample_rank1_factors, sample_rank1_tensor, sample_sparse_lowrank,
    RankOneTensorModel, SparseLowRankModel,
};
use multireg_core::{DenseTensor, Field, Scalar};

fn supports<T: Scalar>(x: &DenseTensor<T>) -> (usize, usize) {
    let m = x.to_matrix().unwrap();
    let rows = (0..m.nrows()).filter(|&i| m.row(i).iter().any(|v| v.abs_val() != 0.0)).count();
    let cols = (0..m.ncols()).filter(|&j| m.column(j).iter().any(|v| v.abs_val() != 0.0)).count();
    (rows, cols)
}

#[test]
fn dense_rank_one_when_sparsity_is_full() {
    let model = SparseLowRankModel::new(6, 7, 1, 6, 7, Field::Real).unwrap();
    let x = sample_sparse_lowrank::<f64>(&model, 1).unwrap();
    assert!(x.data().iter().all(|v| *v != 0.0));
    assert_eq!(svd(&x.to_matrix().unwrap()).unwrap().numerical_rank(1e-10), 1);
}

#[test]
fn samples_lie_in_the_model_set() {
    for seed in 0..200u64 {
        let r = 1 + (seed as usize % 3);
        let model = SparseLowRankModel::new(12, 10, r, 3, 4, Field::Complex).unwrap();
        let x = sample_sparse_lowrank::<Complex64>(&model, seed).unwrap();
        let (rows, cols) = supports(&x);
        assert!(rows <= r * 3 && cols <= r * 4);
        assert!(svd(&x.to_matrix().unwrap()).unwrap().numerical_rank(1e-10) <= r);
    }
}

#[test]
fn rank_one_sparse_count() {
    let model = SparseLowRankModel::new(30, 30, 1, 5, 5, Field::Real).unwrap();
    let x = sample_sparse_lowrank::<f64>(&model, 3).unwrap();
    assert!(x.data().iter().filter(|v| **v != 0.0).count() <= 25);
}

#[test]
fn generators_are_deterministic() {
    let model = SparseLowRankModel::new(8, 8, 2, 3, 3, Field::Real).unwrap();
    assert_eq!(sample_sparse_lowrank::<f64>(&model, 9).unwrap(), sample_sparse_lowrank::<f64>(&model, 9).unwrap());
    assert_ne!(sample_sparse_lowrank::<f64>(&model, 9).unwrap(), sample_sparse_lowrank::<f64>(&model, 10).unwrap());
    let t = RankOneTensorModel::new(vec![2, 3, 4], Field::Complex).unwrap();
    assert_eq!(sample_rank1_tensor::<Complex64>(&t, 4).unwrap(), sample_rank1_tensor::<Complex64>(&t, 4).unwrap());
}

#[test]
fn invalid_models_rejected() {
    assert!(SparseLowRankModel::new(5, 5, 1, 6, 2, Field::Real).is_err());
    assert!(SparseLowRankModel::new(5, 5, 0, 2, 2, Field::Real).is_err());
    assert!(RankOneTensorModel::new(vec![3], Field::Real).is_err());
}

#[test]
fn rank_one_tensor_properties() {
    let model = RankOneTensorModel::new(vec![3, 4, 2, 3], Field::Real).unwrap();
    let factors = sample_rank1_factors::<f64>(&model, 5).unwrap();
    let x = sample_rank1_tensor::<f64>(&model, 5).unwrap();
    let product: f64 = factors.iter().map(|f| f.iter().map(|v| v * v).sum::<f64>().sqrt()).product();
    assert!((x.frobenius_norm() - product).abs() < 1e-10 * product);
    let subsets: [&[usize]; 7] = [&[0], &[1], &[2], &[3], &[0, 1], &[0, 2], &[0, 3]];
    for modes in subsets {
        let b = Bipartition::new(modes.iter().copied()).unwrap();
        let mat = Matricization::new(x.shape(), &b).unwrap();
        let sv = singular_values(&mat.to_matrix(x.data())).unwrap();
        assert!(sv[1] < 1e-10 * sv[0]);
        let nuc = NormAtom::nuclear(x.shape(), b).unwrap().norm(&x).unwrap();
        assert!((nuc - product).abs() < 1e-10 * product);
    }
}

#[test]
fn identity_embedding_has_zero_deviation() {
    let model = SparseLowRankModel::new(3, 4, 1, 2, 2, Field::Real).unwrap();
    let a = GaussianMeasurementMap::<f64>::from_matrix(DMatrix::identity(12, 12), &[3, 4]).unwrap();
    assert!(empirical_rip_deviation(&a, &model, 50, 1).unwrap() < 1e-12);
}

#[test]
fn deviation_matches_exhaustive_supremum() {
    // With r = s₁ = s₂ = 1 on 2×2, unit-norm model elements are phases times
    // matrix units, so the supremum is attained on the four units.
    let model = SparseLowRankModel::new(2, 2, 1, 1, 1, Field::Real).unwrap();
    let a = GaussianMeasurementMap::<f64>::new(6, &[2, 2], 2).unwrap().scaled(1.0 / 6f64.sqrt()).unwrap();
    let mut exhaustive: f64 = 0.0;
    for idx in 0..4 {
        for sign in [-1.0, 1.0] {
            let mut e = DenseTensor::<f64>::zeros(&[2, 2]).unwrap();
            e.data_mut()[idx] = sign;
            let energy: f64 = a.apply(&e).unwrap().iter().map(|v| v * v).sum();
            exhaustive = exhaustive.max((energy - 1.0).abs());
        }
    }
    let sampled = empirical_rip_deviation(&a, &model, 100_000, 3).unwrap();
    assert!(sampled <= exhaustive + 1e-12);
    assert!(sampled >= 0.95 * exhaustive);
}

#[test]
fn deviation_shrinks_with_more_measurements() {
    let model = SparseLowRankModel::new(10, 10, 1, 3, 3, Field::Real).unwrap();
    let mut last = f64::INFINITY;
    for m in [20, 80, 320] {
        let mut devs: Vec<f64> = (0..7u64)
            .map(|k| {
                let a = GaussianMeasurementMap::<f64>::new(m, &[10, 10], 100 + k)
                    .unwrap()
                    .scaled(1.0 / (m as f64).sqrt())
                    .unwrap();
                empirical_rip_deviation(&a, &model, 100, k).unwrap()
            })
            .collect();
        devs.sort_by(f64::total_cmp);
        assert!(devs[3] >= 0.0 && devs[3] < last);
        last = devs[3];
    }
}
