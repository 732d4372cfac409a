use std::f64::consts::PI;

use cyclostab::linalg::{lambda_min, Matrix};
use cyclostab::model::{GainVector, LinearCyclicSystem};
use cyclostab::secant::{
    diagonal_scaling, diagonal_scaling_for_system, hurwitz, lyapunov_residual, normalize, pk_norm_bound,
    secant_satisfied, secant_threshold, solve_lyapunov, v0_norm, verify_modal_series, build_a0, NormBound,
};
use proptest::prelude::*;

#[test]
fn thresholds() {
    assert!(secant_threshold(1).unwrap().is_infinite());
    assert!(secant_threshold(2).unwrap().is_infinite());
    assert!((secant_threshold(3).unwrap() - 8.0).abs() < 1e-12);
    assert!((secant_threshold(4).unwrap() - 4.0).abs() < 1e-12);
    let n = 7.0;
    assert!((secant_threshold(7).unwrap() - (1.0 / (PI / n).cos()).powf(n)).abs() < 1e-12);
}

#[test]
fn unit_system_scaling() {
    let s = diagonal_scaling(&GainVector::new(vec![1.0; 3]).unwrap()).unwrap();
    assert!((s.r - 1.0).abs() < 1e-15);
    assert!((s.lambda_min - 1.0).abs() < 1e-12);
    for d in &s.d {
        assert!((d - 1.0).abs() < 1e-12);
    }
}

#[test]
fn lyapunov_closed_forms() {
    let a = Matrix::from_diagonal(&[-1.0, -2.0, -4.0]);
    let p = solve_lyapunov(&a).unwrap();
    for (i, v) in [0.5, 0.25, 0.125].iter().enumerate() {
        assert!((p.row(i)[i] - v).abs() < 1e-14);
    }
    // [[-1, 1], [0, -1]]: P solves AᵀP + PA = -I, entries by hand
    let a = Matrix::from_rows(&[[-1.0, 1.0], [0.0, -1.0]]);
    let p = solve_lyapunov(&a).unwrap();
    let expected = [[0.5, 0.25], [0.25, 0.75]];
    for (i, row) in expected.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert!((p.row(i)[j] - v).abs() < 1e-14);
        }
    }
    assert!(lyapunov_residual(&a, &p) < 1e-14);
    assert!(solve_lyapunov(&Matrix::from_diagonal(&[1.0, -1.0])).is_err());
}

#[test]
fn v0_and_norm_bound_values() {
    assert!((v0_norm(&[1.0, 0.5, 2.0]) - 1.0 / PI.powi(2)).abs() < 1e-15);
    let sys = LinearCyclicSystem::new(vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]).unwrap();
    let a0 = build_a0(&sys);
    let norm_a0 = a0.as_matrix().spectral_norm().unwrap();
    let v0 = v0_norm(sys.c());
    match pk_norm_bound(&a0, sys.c(), 3).unwrap() {
        NormBound::Applicable(b) => assert!((b - v0 / (9.0 - 2.0 * norm_a0 * v0)).abs() < 1e-14),
        NormBound::Inapplicable => panic!("k = 3 must be applicable"),
    }
    assert!(pk_norm_bound(&a0, sys.c(), 0).is_err());
}

#[test]
fn modal_report_for_unit_system() {
    let sys = LinearCyclicSystem::new(vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]).unwrap();
    let r = verify_modal_series(&sys, 20).unwrap();
    assert!(r.holds);
    assert_eq!(r.per_mode.len(), 21);
    assert!(r.non_hurwitz_modes.is_empty());
    assert!(r.all_within_bound());
    let json = serde_json::to_value(&r).unwrap();
    assert!((json["threshold"].as_f64().unwrap() - 8.0).abs() < 1e-12);
}

#[test]
fn infinite_threshold_serializes_as_text() {
    let sys = LinearCyclicSystem::new(vec![1.0; 2], vec![3.0; 2], vec![1.0; 2]).unwrap();
    let json = serde_json::to_value(verify_modal_series(&sys, 3).unwrap()).unwrap();
    assert_eq!(json["threshold"], "inf");
}

#[test]
fn violated_secant_yields_unstable_modes() {
    let sys = LinearCyclicSystem::new(vec![1.0; 3], vec![2.2; 3], vec![0.01; 3]).unwrap();
    let r = verify_modal_series(&sys, 5).unwrap();
    assert!(!r.holds);
    assert!(r.non_hurwitz_modes.contains(&0));
    assert!(!hurwitz(build_a0(&sys).as_matrix()).unwrap().is_hurwitz);
}

proptest! {
    #[test]
    fn lambda_min_follows_closed_form(n in 3usize..9, seeds in proptest::collection::vec(-4.0f64..4.0, 8)) {
        let gains: Vec<f64> = seeds[..n].iter().map(|v| v.exp()).collect();
        let g = GainVector::new(gains).unwrap();
        let s = diagonal_scaling(&g).unwrap();
        let analytic = 2.0 - 2.0 * s.r * (PI / n as f64).cos();
        prop_assert_eq!(s.lambda_min > 0.0, analytic > 0.0);
        prop_assert_eq!(secant_satisfied(&g).holds, analytic > 0.0);
    }

    #[test]
    fn rate_weighted_variant_matches(a in proptest::collection::vec(0.2f64..3.0, 4), b in proptest::collection::vec(0.2f64..3.0, 4)) {
        let sys = LinearCyclicSystem::new(a, b, vec![1.0; 4]).unwrap();
        let plain = diagonal_scaling(&normalize(&sys).gains).unwrap();
        let weighted = diagonal_scaling_for_system(&sys).unwrap();
        prop_assert!((plain.lambda_min - weighted.lambda_min).abs() < 1e-9 * (1.0 + plain.lambda_min.abs()));
    }

    #[test]
    fn lyapunov_residual_small(diag in proptest::collection::vec(0.5f64..3.0, 4), off in proptest::collection::vec(-1.0f64..1.0, 4)) {
        let mut rows = vec![vec![0.0; 4]; 4];
        for i in 0..4 {
            rows[i][i] = -diag[i] - 1.0;
            rows[i][(i + 1) % 4] = off[i] * 0.5;
        }
        let a = Matrix::from_rows(&rows);
        prop_assume!(hurwitz(&a).unwrap().is_hurwitz);
        let p = solve_lyapunov(&a).unwrap();
        prop_assert!(lyapunov_residual(&a, &p) < 1e-10);
        prop_assert!(lambda_min(&p).unwrap() > 0.0);
    }
}
