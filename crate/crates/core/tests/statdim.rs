use multireg_core::linalg::{derive_seed, sample_gaussian};
use multireg_core::regularizers::{CombineMode, CompositeRegularizer, NormAtom};
use multireg_core::solver::SolverOptions;
use multireg_core::statdim::{closed_form_l1_cone_distance, closed_form_nuclear_cone_distance, estimate_statdim};
use multireg_core::DenseTensor;

fn l1(shape: &[usize]) -> CompositeRegularizer {
    CompositeRegularizer::new(CombineMode::Sum, vec![NormAtom::l1(shape).unwrap()], vec![1.0]).unwrap()
}

/// Dense grid over `τ ∈ [0, 10‖g‖]`.
fn grid_min(f: impl Fn(f64) -> f64, upper: f64, points: usize) -> f64 {
    (0..=points)
        .map(|i| f(upper * i as f64 / points as f64))
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
        .sqrt()
}

#[test]
fn l1_oracle_trivial_cases() {
    let x0 = DenseTensor::<f64>::from_real(vec![4], &[2.0, 0.0, -1.0, 0.0]).unwrap();
    let inside = DenseTensor::<f64>::from_real(vec![4], &[1.0, 0.0, -1.0, 0.0]).unwrap();
    assert!(closed_form_l1_cone_distance(&inside, &x0).unwrap() < 1e-9);
    let away = DenseTensor::<f64>::from_real(vec![4], &[-3.0, 0.0, 3.0, 0.0]).unwrap();
    let d = closed_form_l1_cone_distance(&away, &x0).unwrap();
    assert!((d - away.frobenius_norm()).abs() < 1e-9);
}

#[test]
fn l1_oracle_matches_grid_search() {
    for k in 0..5u64 {
        let x0 = DenseTensor::<f64>::from_real(vec![6], &[1.0, -2.0, 0.0, 0.5, 0.0, 0.0]).unwrap();
        let g = sample_gaussian::<f64>(&[6], derive_seed(40, &[k]));
        let f = |tau: f64| {
            g.data()
                .iter()
                .zip(x0.data())
                .map(|(gi, xi)| {
                    if *xi != 0.0 {
                        (gi - tau * xi.signum()).powi(2)
                    } else {
                        (gi.abs() - tau).max(0.0).powi(2)
                    }
                })
                .sum::<f64>()
        };
        let grid = grid_min(f, 10.0 * g.frobenius_norm(), 1_000_000);
        let oracle = closed_form_l1_cone_distance(&g, &x0).unwrap();
        assert!((grid - oracle).abs() < 1e-4, "{grid} vs {oracle}");
    }
}

#[test]
fn nuclear_oracle_trivial_cases() {
    let x0 = DenseTensor::<f64>::from_real(vec![3, 3], &[2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    let uv = DenseTensor::<f64>::from_real(vec![3, 3], &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(closed_form_nuclear_cone_distance(&uv, &x0).unwrap() < 1e-9);

    // Full rank: the cone is the ray through UVᵀ.
    let full = sample_gaussian::<f64>(&[4, 4], 41);
    let g = sample_gaussian::<f64>(&[4, 4], 42);
    let dec = multireg_core::linalg::svd(&full.to_matrix().unwrap()).unwrap();
    let e = DenseTensor::from_matrix(&(&dec.u * &dec.v_t));
    let tau = (g.real_inner(&e) / 4.0).max(0.0);
    let expected = g.distance(&e.scaled(tau));
    assert!((closed_form_nuclear_cone_distance(&g, &full).unwrap() - expected).abs() < 1e-9);
}

#[test]
fn nuclear_oracle_matches_grid_search() {
    for k in 0..3u64 {
        let a = sample_gaussian::<f64>(&[5, 2], derive_seed(43, &[k])).to_matrix().unwrap();
        let b = sample_gaussian::<f64>(&[2, 5], derive_seed(44, &[k])).to_matrix().unwrap();
        let x0 = DenseTensor::from_matrix(&(&a * &b));
        let g = sample_gaussian::<f64>(&[5, 5], derive_seed(45, &[k]));
        let dec = multireg_core::linalg::svd(&x0.to_matrix().unwrap()).unwrap();
        let u = dec.u.columns(0, 2).into_owned();
        let vt = dec.v_t.rows(0, 2).into_owned();
        let gm = g.to_matrix().unwrap();
        let pu = nalgebra::DMatrix::identity(5, 5) - &u * u.transpose();
        let pv = nalgebra::DMatrix::identity(5, 5) - vt.transpose() * &vt;
        let perp = &pu * &gm * &pv;
        let tangent = &gm - &perp;
        let e = &u * &vt;
        let sigma = perp.singular_values();
        let f = |tau: f64| {
            (&tangent - &e * tau).norm_squared() + sigma.iter().map(|s| (s - tau).max(0.0).powi(2)).sum::<f64>()
        };
        let grid = grid_min(f, 10.0 * g.frobenius_norm(), 1_000_000);
        let oracle = closed_form_nuclear_cone_distance(&g, &x0).unwrap();
        assert!((grid - oracle).abs() < 1e-4, "{grid} vs {oracle}");
    }
}

#[test]
fn ray_cone_statdim() {
    // ∂‖·‖₁ at a dense-signed x0 is a single point, its cone a ray.
    let x0 = DenseTensor::<f64>::from_real(vec![4], &[1.0, 1.0, 1.0, 1.0]).unwrap();
    let est = estimate_statdim(&x0, &l1(&[4]), 400, 46, &SolverOptions::distance()).unwrap();
    assert!(est.valid && est.failures == 0);
    assert!((est.mean - 3.5).abs() <= 3.0 * est.stderr, "{est:?}");
    // complementarity: δ(cone) + δ(polar) = d with the ray's δ = 1/2
    assert!((est.mean + 0.5 - 4.0).abs() <= 3.0 * est.stderr);
    assert!((est.stderr - est.std_dev / 20.0).abs() < 1e-12);
}

#[test]
fn half_line_statdim() {
    let x0 = DenseTensor::<f64>::from_real(vec![1], &[1.0]).unwrap();
    let est = estimate_statdim(&x0, &l1(&[1]), 400, 47, &SolverOptions::distance()).unwrap();
    assert!((est.mean - 0.5).abs() <= 3.0 * est.stderr, "{est:?}");
}

#[test]
fn estimates_stay_in_range_and_are_scale_invariant() {
    let x0 = DenseTensor::<f64>::from_real(vec![3, 3], &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    let atoms = vec![NormAtom::l1(&[3, 3]).unwrap(), NormAtom::matrix_nuclear(3, 3).unwrap()];
    let reg = CompositeRegularizer::with_optimal_weights(CombineMode::Max, atoms.clone(), &x0).unwrap();
    let opts = SolverOptions::distance();
    let a = estimate_statdim(&x0, &reg, 20, 48, &opts).unwrap();
    assert!(a.mean >= 0.0 && a.mean <= 9.0);
    let scaled = x0.scaled(7.5);
    let reg2 = CompositeRegularizer::with_optimal_weights(CombineMode::Max, atoms, &scaled).unwrap();
    let b = estimate_statdim(&scaled, &reg2, 20, 48, &opts).unwrap();
    for (p, q) in a.squared_distances.iter().zip(&b.squared_distances) {
        let (p, q) = (p.unwrap(), q.unwrap());
        assert!((p - q).abs() <= 1e-5 * (1.0 + p));
    }
}

#[test]
fn estimates_are_deterministic() {
    let x0 = DenseTensor::<f64>::from_real(vec![5], &[1.0, 0.0, -2.0, 0.0, 0.0]).unwrap();
    let opts = SolverOptions::distance();
    let a = estimate_statdim(&x0, &l1(&[5]), 30, 49, &opts).unwrap();
    let b = estimate_statdim(&x0, &l1(&[5]), 30, 49, &opts).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.squared_distances, b.squared_distances);
}

#[test]
fn rejects_bad_inputs() {
    let zero = DenseTensor::<f64>::zeros(&[3]).unwrap();
    assert!(estimate_statdim(&zero, &l1(&[3]), 10, 0, &SolverOptions::distance()).is_err());
    let x0 = DenseTensor::<f64>::from_real(vec![3], &[1.0, 0.0, 0.0]).unwrap();
    assert!(estimate_statdim(&x0, &l1(&[3]), 1, 0, &SolverOptions::distance()).is_err());
}
