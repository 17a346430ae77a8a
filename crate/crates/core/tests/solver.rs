use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use multireg_core::linalg::{derive_seed, sample_gaussian};
use multireg_core::measurement::GaussianMeasurementMap;
use multireg_core::regularizers::{CombineMode, CompositeRegularizer, NormAtom};
use multireg_core::signals::{sample_sparse_lowrank, SparseLowRankModel};
use multireg_core::solver::{
    composite_dual_norm, polish, solve_cone_distance, solve_recovery, ConeDistanceProblem, SolverOptions,
};
use multireg_core::statdim::{closed_form_l1_cone_distance, closed_form_nuclear_cone_distance};
use multireg_core::{DenseTensor, Field};

fn l1_only(shape: &[usize]) -> CompositeRegularizer {
    CompositeRegularizer::new(CombineMode::Sum, vec![NormAtom::l1(shape).unwrap()], vec![1.0]).unwrap()
}

fn nuc_only(n1: usize, n2: usize) -> CompositeRegularizer {
    CompositeRegularizer::new(CombineMode::Sum, vec![NormAtom::matrix_nuclear(n1, n2).unwrap()], vec![1.0])
        .unwrap()
}

fn l1_nuc(n1: usize, n2: usize) -> Vec<NormAtom> {
    vec![NormAtom::l1(&[n1, n2]).unwrap(), NormAtom::matrix_nuclear(n1, n2).unwrap()]
}

fn distance(g: &DenseTensor, x0: &DenseTensor, reg: &CompositeRegularizer) -> f64 {
    let (d, report) =
        solve_cone_distance(&ConeDistanceProblem { g, x0, regularizer: reg }, &SolverOptions::distance()).unwrap();
    assert!(report.converged(), "{report:?}");
    d
}

fn rel_err(a: &DenseTensor, b: &DenseTensor) -> f64 {
    a.distance(b) / b.frobenius_norm()
}

#[test]
fn sign_pattern_lies_in_l1_cone() {
    let x0 = DenseTensor::<f64>::from_real(vec![6], &[0.0, 2.0, 0.0, -1.0, 0.5, 0.0]).unwrap();
    let g = DenseTensor::<f64>::from_real(vec![6], &[0.0, 1.0, 0.0, -1.0, 1.0, 0.0]).unwrap();
    assert!(distance(&g, &x0, &l1_only(&[6])) < 1e-5);
}

#[test]
fn l1_cone_distance_matches_oracle() {
    for k in 0..30u64 {
        let d = 4 + (k as usize % 9);
        let mut x0 = sample_gaussian::<f64>(&[d], derive_seed(1, &[k]));
        for (i, v) in x0.data_mut().iter_mut().enumerate() {
            if i % 3 == 1 {
                *v = 0.0;
            }
        }
        let g = sample_gaussian::<f64>(&[d], derive_seed(2, &[k]));
        let oracle = closed_form_l1_cone_distance(&g, &x0).unwrap();
        let solved = distance(&g, &x0, &l1_only(&[d]));
        assert!((solved - oracle).abs() <= 1e-3 * (1.0 + oracle), "k={k}: {solved} vs {oracle}");
    }
}

#[test]
fn nuclear_cone_distance_matches_oracle() {
    for k in 0..10u64 {
        let a = sample_gaussian::<f64>(&[6, 2], derive_seed(3, &[k])).to_matrix().unwrap();
        let b = sample_gaussian::<f64>(&[2, 6], derive_seed(4, &[k])).to_matrix().unwrap();
        let x0 = DenseTensor::from_matrix(&(a * b));
        let g = sample_gaussian::<f64>(&[6, 6], derive_seed(5, &[k]));
        let oracle = closed_form_nuclear_cone_distance(&g, &x0).unwrap();
        let solved = distance(&g, &x0, &nuc_only(6, 6));
        assert!((solved - oracle).abs() <= 1e-3 * (1.0 + oracle), "k={k}: {solved} vs {oracle}");
    }
}

fn sparse_lowrank_signal(n: usize, s: usize, seed: u64) -> DenseTensor {
    let model = SparseLowRankModel::new(n, n, 1, s, s, Field::Real).unwrap();
    sample_sparse_lowrank::<f64>(&model, seed).unwrap()
}

#[test]
fn max_composite_beats_sum_composites() {
    let x0 = sparse_lowrank_signal(6, 3, 7);
    let atoms = l1_nuc(6, 6);
    let max = CompositeRegularizer::with_optimal_weights(CombineMode::Max, atoms.clone(), &x0).unwrap();
    for k in 0..3u64 {
        let g = sample_gaussian::<f64>(&[6, 6], derive_seed(8, &[k]));
        let dm = distance(&g, &x0, &max);
        for lambda in [[1.0, 0.1], [1.0, 1.0], [0.1, 1.0], [0.3, 2.0]] {
            let sum = CompositeRegularizer::new(CombineMode::Sum, atoms.clone(), lambda.to_vec()).unwrap();
            let ds = distance(&g, &x0, &sum);
            assert!(dm <= ds + 1e-4 * (1.0 + ds), "max {dm} > sum {ds} for {lambda:?}");
        }
    }
}

#[test]
fn adding_an_atom_to_a_max_composite_never_increases_distance() {
    let x0 = sparse_lowrank_signal(5, 3, 9);
    let atoms = l1_nuc(5, 5);
    let single = CompositeRegularizer::with_optimal_weights(CombineMode::Max, atoms[..1].to_vec(), &x0).unwrap();
    let both = CompositeRegularizer::with_optimal_weights(CombineMode::Max, atoms, &x0).unwrap();
    for k in 0..3u64 {
        let g = sample_gaussian::<f64>(&[5, 5], derive_seed(10, &[k]));
        let d1 = distance(&g, &x0, &single);
        let d2 = distance(&g, &x0, &both);
        assert!(d2 <= d1 + 1e-4 * (1.0 + d1), "{d2} > {d1}");
    }
}

#[test]
fn square_map_recovers_unique_point() {
    let x0 = sample_gaussian::<f64>(&[3, 3], 11);
    let a = GaussianMeasurementMap::<f64>::new(9, &[3, 3], 12).unwrap();
    let y = a.apply(&x0).unwrap();
    let reg = CompositeRegularizer::with_optimal_weights(CombineMode::Max, l1_nuc(3, 3), &x0).unwrap();
    let (x, _) = solve_recovery(&a, &y, &reg, &SolverOptions::recovery()).unwrap();
    assert!(rel_err(&x, &x0) < 1e-8);
}

#[test]
fn zero_measurements_give_zero() {
    let a = GaussianMeasurementMap::<f64>::new(4, &[10], 13).unwrap();
    let (x, report) = solve_recovery(&a, &[0.0; 4], &l1_only(&[10]), &SolverOptions::recovery()).unwrap();
    assert_eq!(x.max_abs(), 0.0);
    assert!(report.converged());
}

/// Least-norm dual certificate `ν` with `(Aᵀν)_S = sign(x_S)`; strict
/// `‖(Aᵀν)_{Sᶜ}‖∞ < 1` certifies that `x` is the unique ℓ1 minimizer.
fn l1_certificate(a: &DMatrix<f64>, x: &[f64]) -> Option<f64> {
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] != 0.0).collect();
    let a_s = a.select_columns(&support);
    let signs = DVector::from_iterator(support.len(), support.iter().map(|&i| x[i].signum()));
    let nu = a_s.transpose().pseudo_inverse(1e-12).ok()? * signs;
    let q = a.transpose() * nu;
    let off = (0..x.len()).filter(|i| !support.contains(i)).map(|i| q[i].abs()).fold(0.0, f64::max);
    Some(off)
}

#[test]
fn l1_recovery_of_a_basis_vector() {
    let mut x0 = DenseTensor::<f64>::zeros(&[10]).unwrap();
    x0.data_mut()[0] = 1.0;
    let a = GaussianMeasurementMap::<f64>::new(8, &[10], 2024).unwrap();
    let certificate = l1_certificate(a.matrix(), x0.data()).unwrap();
    assert!(certificate < 1.0, "seed does not admit a strict certificate: {certificate}");
    let y = a.apply(&x0).unwrap();
    let (x, report) = solve_recovery(&a, &y, &l1_only(&[10]), &SolverOptions::recovery()).unwrap();
    assert!(rel_err(&x, &x0) < 1e-5, "{report:?}");
    assert!(a.residual_norm(x.data(), &y) <= 1e-6 * y.iter().map(|v| v * v).sum::<f64>().sqrt());
}

#[test]
fn l1_recovery_without_polish_is_accurate() {
    let mut x0 = DenseTensor::<f64>::zeros(&[40]).unwrap();
    x0.data_mut()[3] = 1.5;
    x0.data_mut()[17] = -0.7;
    x0.data_mut()[30] = 0.2;
    let a = GaussianMeasurementMap::<f64>::new(25, &[40], 5).unwrap();
    let y = a.apply(&x0).unwrap();
    let opts = SolverOptions { polish: false, ..SolverOptions::recovery() };
    let (x, report) = solve_recovery(&a, &y, &l1_only(&[40]), &opts).unwrap();
    assert!(report.converged() && !report.polished);
    assert!(rel_err(&x, &x0) < 1e-4, "{}", rel_err(&x, &x0));
}

#[test]
fn complex_sparse_recovery() {
    let mut x0 = DenseTensor::<Complex64>::zeros(&[30]).unwrap();
    x0.data_mut()[2] = Complex64::new(1.0, -0.5);
    x0.data_mut()[21] = Complex64::new(-0.3, 0.8);
    let a = GaussianMeasurementMap::<Complex64>::new(15, &[30], 6).unwrap();
    let y = a.apply(&x0).unwrap();
    let (x, _) = solve_recovery(&a, &y, &l1_only(&[30]), &SolverOptions::recovery()).unwrap();
    assert!(x.distance(&x0) / x0.frobenius_norm() < 1e-5);
}

#[test]
fn composite_recovery_of_sparse_lowrank_matrix() {
    let x0 = sparse_lowrank_signal(12, 4, 15);
    let a = GaussianMeasurementMap::<f64>::new(70, &[12, 12], 16).unwrap();
    let y = a.apply(&x0).unwrap();
    for mode in [CombineMode::Max, CombineMode::Sum] {
        let reg = CompositeRegularizer::with_optimal_weights(mode, l1_nuc(12, 12), &x0).unwrap();
        let (x, report) = solve_recovery(&a, &y, &reg, &SolverOptions::recovery()).unwrap();
        assert!(rel_err(&x, &x0) < 1e-5, "{mode:?}: {} {report:?}", rel_err(&x, &x0));
        assert!(reg.norm(&x).unwrap() <= reg.norm(&x0).unwrap() * (1.0 + 1e-6));
    }
}

#[test]
fn recovered_objective_never_exceeds_truth() {
    // Undersampled: the minimizer differs from x0 but is no larger in norm.
    let x0 = sparse_lowrank_signal(8, 5, 17);
    let a = GaussianMeasurementMap::<f64>::new(12, &[8, 8], 18).unwrap();
    let y = a.apply(&x0).unwrap();
    let reg = CompositeRegularizer::with_optimal_weights(CombineMode::Max, l1_nuc(8, 8), &x0).unwrap();
    let (x, report) = solve_recovery(&a, &y, &reg, &SolverOptions::recovery()).unwrap();
    if report.converged() {
        assert!(reg.norm(&x).unwrap() <= reg.norm(&x0).unwrap() + 1e-5);
    }
}

#[test]
fn polish_recovers_noisy_sparse_vector() {
    let mut x0 = DenseTensor::<f64>::zeros(&[20]).unwrap();
    x0.data_mut()[4] = 2.0;
    let a = GaussianMeasurementMap::<f64>::new(3, &[20], 19).unwrap();
    let y = a.apply(&x0).unwrap();
    let noise = sample_gaussian::<f64>(&[20], 20).scaled(1e-3);
    let noisy = x0.add(&noise);
    let out = polish(&noisy, &a, &y).unwrap();
    assert!(out.distance(&x0) < 1e-8);
    assert!(a.residual_norm(out.data(), &y) <= a.residual_norm(noisy.data(), &y));
}

#[test]
fn polish_keeps_exact_points() {
    let x0 = sparse_lowrank_signal(6, 2, 21);
    let a = GaussianMeasurementMap::<f64>::new(20, &[6, 6], 22).unwrap();
    let y = a.apply(&x0).unwrap();
    let out = polish(&x0, &a, &y).unwrap();
    assert!(out.distance(&x0) < 1e-10);
}

#[test]
fn polish_never_increases_residual() {
    for k in 0..10u64 {
        let x = sample_gaussian::<f64>(&[5, 5], derive_seed(23, &[k]));
        let a = GaussianMeasurementMap::<f64>::new(10, &[5, 5], derive_seed(24, &[k])).unwrap();
        let y: Vec<f64> = sample_gaussian::<f64>(&[10], derive_seed(25, &[k])).into_data();
        let out = polish(&x, &a, &y).unwrap();
        assert!(a.residual_norm(out.data(), &y) <= a.residual_norm(x.data(), &y));
    }
}

#[test]
fn single_atom_dual_norm_is_scaled_atom_dual() {
    let y = sample_gaussian::<f64>(&[4, 5], 26);
    for atom in l1_nuc(4, 5) {
        let reg = CompositeRegularizer::new(CombineMode::Max, vec![atom.clone()], vec![2.5]).unwrap();
        let (v, _) = composite_dual_norm(&y, &reg, &SolverOptions::distance()).unwrap();
        assert!((v - atom.dual_norm(&y).unwrap() / 2.5).abs() < 1e-12);
    }
}

#[test]
fn sum_dual_is_below_every_single_term() {
    let atoms = l1_nuc(4, 4);
    for k in 0..5u64 {
        let y = sample_gaussian::<f64>(&[4, 4], derive_seed(27, &[k]));
        let lambda = [0.5 + k as f64 * 0.3, 1.0];
        let reg = CompositeRegularizer::new(CombineMode::Sum, atoms.clone(), lambda.to_vec()).unwrap();
        let (v, _) = composite_dual_norm(&y, &reg, &SolverOptions::distance()).unwrap();
        let single = atoms
            .iter()
            .zip(lambda)
            .map(|(a, l)| a.dual_norm(&y).unwrap() / l)
            .fold(f64::INFINITY, f64::min);
        assert!(v <= single + 1e-6, "{v} > {single}");
    }
}

fn spectral_2x2(m: [f64; 4]) -> f64 {
    let [a, b, c, d] = m;
    let s = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    (0.5 * (s + (s * s - 4.0 * det * det).max(0.0).sqrt())).sqrt()
}

fn linf(m: [f64; 4]) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Grid search over decompositions `y = x₁ + x₂` with successive refinement.
fn grid_sum_dual(y: [f64; 4]) -> f64 {
    let objective = |x: [f64; 4]| {
        let rest = [y[0] - x[0], y[1] - x[1], y[2] - x[2], y[3] - x[3]];
        linf(x).max(spectral_2x2(rest))
    };
    let mut center = [0.0; 4];
    let mut radius = linf(y) * 2.0;
    let mut best = objective(center);
    for _ in 0..8 {
        let steps = 12i32;
        let h = radius / steps as f64;
        let mut next = center;
        for i in -steps..=steps {
            for j in -steps..=steps {
                for k in -steps..=steps {
                    for l in -steps..=steps {
                        let x = [
                            center[0] + i as f64 * h,
                            center[1] + j as f64 * h,
                            center[2] + k as f64 * h,
                            center[3] + l as f64 * h,
                        ];
                        let v = objective(x);
                        if v < best {
                            best = v;
                            next = x;
                        }
                    }
                }
            }
        }
        center = next;
        radius = 3.0 * h;
    }
    best
}

#[test]
fn two_by_two_sum_dual_matches_grid_search() {
    let reg = CompositeRegularizer::new(CombineMode::Sum, l1_nuc(2, 2), vec![1.0, 1.0]).unwrap();
    for k in 0..3u64 {
        let y = sample_gaussian::<f64>(&[2, 2], derive_seed(28, &[k]));
        let (v, report) = composite_dual_norm(&y, &reg, &SolverOptions::distance()).unwrap();
        assert!(report.converged());
        let grid = grid_sum_dual(y.data().try_into().unwrap());
        assert!((v - grid).abs() < 1e-2, "{v} vs {grid}");
    }
}

#[test]
fn max_composite_norm_and_dual_satisfy_holder() {
    let atoms = l1_nuc(3, 4);
    for k in 0..10u64 {
        let x = sample_gaussian::<f64>(&[3, 4], derive_seed(29, &[k]));
        let y = sample_gaussian::<f64>(&[3, 4], derive_seed(30, &[k]));
        let reg = CompositeRegularizer::new(CombineMode::Max, atoms.clone(), vec![1.0, 0.7]).unwrap();
        let (dual, _) = composite_dual_norm(&y, &reg, &SolverOptions::distance()).unwrap();
        let lhs = x.real_inner(&y);
        assert!(lhs <= reg.norm(&x).unwrap() * dual * (1.0 + 1e-6) + 1e-9);
    }
}
