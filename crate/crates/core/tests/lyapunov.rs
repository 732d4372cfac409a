use std::f64::consts::PI;

use cyclostab::error::Error;
use cyclostab::lyapunov::{
    jensen_lower_bound, monitor_decrease, output_norm_sq, storage_pde, total_v, LyapunovState, LyapunovWeights,
    MonitorOptions,
};
use cyclostab::model::{GainVector, ScalarFn};
use cyclostab::pde::{Field, SpatialGrid};
use cyclostab::trajectory::{Layout, Trajectory};
use proptest::prelude::*;

fn unit_weights() -> LyapunovWeights {
    LyapunovWeights::new(GainVector::new(vec![1.0; 3]).unwrap()).unwrap()
}

fn linear_g() -> Vec<ScalarFn> {
    vec![ScalarFn::linear(1.0).unwrap(); 3]
}

#[test]
fn storage_examples() {
    let grid = SpatialGrid::new(101).unwrap();
    let g = ScalarFn::linear(0.6).unwrap();
    let flat = vec![1.5; 101];
    assert!((storage_pde(&flat, &g, 2.0, &grid).unwrap() - 2.0 * 0.6 * 1.5 * 1.5 / 2.0).abs() < 1e-14);
    assert_eq!(storage_pde(&[0.0; 101], &g, 2.0, &grid).unwrap(), 0.0);

    let mut errs = Vec::new();
    for nodes in [21, 41] {
        let grid = SpatialGrid::new(nodes).unwrap();
        let psi: Vec<f64> = grid.points().iter().map(|x| (PI * x).cos()).collect();
        errs.push((storage_pde(&psi, &ScalarFn::linear(1.0).unwrap(), 1.0, &grid).unwrap() - 0.25).abs());
    }
    assert!(errs[1] <= errs[0] / 3.0 || errs[1] < 1e-14);
}

#[test]
fn total_v_examples() {
    let grid = SpatialGrid::new(11).unwrap();
    let ones = Field::uniform(&[1.0; 3], &grid);
    let v = total_v(LyapunovState::Field(&ones, &grid), &unit_weights(), &linear_g()).unwrap();
    assert!((v - 1.5).abs() < 1e-14);
    let zero = Field::zeros(3, &grid);
    assert_eq!(total_v(LyapunovState::Field(&zero, &grid), &unit_weights(), &linear_g()).unwrap(), 0.0);

    let x = [0.3, -0.2, 0.9];
    let lumped = total_v(LyapunovState::Lumped(&x), &unit_weights(), &linear_g()).unwrap();
    let single = total_v(LyapunovState::Compartments { x: &x, m: 1 }, &unit_weights(), &linear_g()).unwrap();
    assert_eq!(lumped, single);
    let doubled: Vec<f64> = x.iter().chain(x.iter()).cloned().collect();
    let two = total_v(LyapunovState::Compartments { x: &doubled, m: 2 }, &unit_weights(), &linear_g()).unwrap();
    assert!((two - 2.0 * lumped).abs() < 1e-15);
    let y2 = output_norm_sq(LyapunovState::Lumped(&x), &linear_g()).unwrap();
    assert!((y2 - 0.94).abs() < 1e-15);
}

#[test]
fn weights_precondition() {
    let err = LyapunovWeights::new(GainVector::new(vec![2.0, 2.0, 2.5]).unwrap()).unwrap_err();
    assert!(matches!(err, Error::WeightsPrecondition { .. }));
}

#[test]
fn equilibrium_trajectory_is_flat() {
    let times: Vec<f64> = (0..20).map(|k| k as f64 * 0.1).collect();
    let states = vec![vec![0.0; 3]; 20];
    let traj = Trajectory::from_samples(times, states, Layout::Lumped { n: 3 }).unwrap();
    let r = monitor_decrease(&traj, None, &unit_weights(), &linear_g(), &MonitorOptions::default()).unwrap();
    assert!(r.violations.is_empty());
    assert_eq!(r.v_initial, 0.0);
    assert_eq!(r.v_final, 0.0);
}

#[test]
fn increase_is_flagged() {
    let times = vec![0.0, 1.0, 2.0];
    let states = vec![vec![0.1, 0.0, 0.0], vec![0.5, 0.0, 0.0], vec![0.2, 0.0, 0.0]];
    let traj = Trajectory::from_samples(times, states, Layout::Lumped { n: 3 }).unwrap();
    let r = monitor_decrease(&traj, None, &unit_weights(), &linear_g(), &MonitorOptions::default()).unwrap();
    assert_eq!(r.violations.len(), 1);
    assert_eq!(r.violations[0].t, 1.0);
    assert!((r.max_violation - 0.12).abs() < 1e-12);
}

#[test]
fn jensen_examples() {
    let grid = SpatialGrid::new(101).unwrap();
    let g = ScalarFn::michaelis_menten(2.0, 1.0).unwrap().shifted(1.0);
    let flat = vec![0.7; 101];
    let v = storage_pde(&flat, &g, 1.5, &grid).unwrap();
    assert!((jensen_lower_bound(&flat, &g, 1.5, &grid).unwrap() - v).abs() < 1e-12);
    assert_eq!(jensen_lower_bound(&[0.0; 101], &g, 1.5, &grid).unwrap(), 0.0);

    let lin = ScalarFn::linear(1.0).unwrap();
    let psi: Vec<f64> = grid.points().iter().map(|x| 2.0 * x - 1.0).collect();
    let exact = storage_pde(&psi, &lin, 1.0, &grid).unwrap();
    let bound = jensen_lower_bound(&psi, &lin, 1.0, &grid).unwrap();
    assert!((exact - 1.0 / 6.0).abs() < 1e-4);
    assert!(bound < exact - 0.01);
}

proptest! {
    #[test]
    fn positivity(x in proptest::collection::vec(-2.0f64..2.0, 6)) {
        let v = total_v(LyapunovState::Compartments { x: &x, m: 2 }, &unit_weights(), &linear_g()).unwrap();
        if x.iter().all(|v| *v == 0.0) {
            prop_assert_eq!(v, 0.0);
        } else {
            prop_assert!(v > 0.0);
        }
    }
}
