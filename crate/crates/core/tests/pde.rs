use std::f64::consts::PI;

use cyclostab::error::Error;
use cyclostab::model::{LinearCyclicSystem, MapkParams, NonlinearCyclicSystem, ScalarFn};
use cyclostab::ode::lumped_rhs;
use cyclostab::pde::{
    component_norm, equilibrium_solve, field_at, rhs, simulate_pde, write_pde_csv, Field, Norm, SpatialGrid,
};
use cyclostab::trajectory::{Schedule, TimeStep};

fn unit_linear() -> NonlinearCyclicSystem {
    LinearCyclicSystem::new(vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]).unwrap().to_nonlinear()
}

#[test]
fn constant_field_matches_lumped() {
    let sys = MapkParams::default().system().unwrap();
    let grid = SpatialGrid::new(17).unwrap();
    let x = [0.3, 0.7, 0.2];
    let out = rhs(&sys, &grid, &Field::uniform(&x, &grid)).unwrap();
    let lumped = lumped_rhs(&sys, &x).unwrap();
    for j in 0..grid.nodes() {
        for (a, b) in out.at_node(j).iter().zip(&lumped) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}

#[test]
fn cosine_mode_is_an_eigenfunction_to_second_order() {
    let sys = NonlinearCyclicSystem::new(
        vec![ScalarFn::linear(0.0).unwrap(); 1],
        vec![ScalarFn::linear(0.0).unwrap(); 1],
        Some(vec![ScalarFn::constant(1.0).unwrap()]),
    )
    .unwrap();
    let mut errs = Vec::new();
    for nodes in [21, 41, 81] {
        let grid = SpatialGrid::new(nodes).unwrap();
        let psi = Field::from_fn(1, &grid, |_, xi| (PI * xi).cos());
        let lap = rhs(&sys, &grid, &psi).unwrap();
        let err = grid
            .points()
            .iter()
            .zip(lap.component(0))
            .map(|(xi, v)| (v + PI * PI * (PI * xi).cos()).abs())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn pure_diffusion_conserves_mass() {
    let sys = NonlinearCyclicSystem::new(
        vec![ScalarFn::linear(0.0).unwrap()],
        vec![ScalarFn::linear(0.0).unwrap()],
        Some(vec![ScalarFn::michaelis_menten(1.0, 1.0).unwrap().translated(1.0)]),
    )
    .unwrap();
    let grid = SpatialGrid::new(41).unwrap();
    let psi0 = Field::from_fn(1, &grid, |_, xi| xi * xi * (3.0 - 2.0 * xi));
    let traj = simulate_pde(&sys, &grid, &psi0, &Schedule::new(0.5, TimeStep::Auto, Some(0.1)).unwrap()).unwrap();
    let mass = |k: usize| {
        let f = field_at(&traj, k, &grid).unwrap();
        grid.weights().iter().zip(f.component(0)).map(|(w, v)| w * v).sum::<f64>()
    };
    assert!((mass(0) - mass(traj.len() - 1)).abs() < 1e-13);
}

#[test]
fn linear_system_decays() {
    let grid = SpatialGrid::new(31).unwrap();
    let psi0 = Field::from_fn(3, &grid, |i, xi| (i as f64 + 1.0) * (PI * xi).cos() + 0.2);
    let traj = simulate_pde(&unit_linear(), &grid, &psi0, &Schedule::new(10.0, TimeStep::Auto, Some(1.0)).unwrap())
        .unwrap();
    let last = field_at(&traj, traj.len() - 1, &grid).unwrap();
    assert!(last.max_abs() < 0.05 * psi0.max_abs());
    let norms: Vec<f64> = (0..traj.len())
        .map(|k| component_norm(field_at(&traj, k, &grid).unwrap().component(0), &grid, Norm::L2))
        .collect();
    assert!(norms.last().unwrap() < &norms[0]);
}

#[test]
fn unstable_fixed_step_is_rejected() {
    let grid = SpatialGrid::new(101).unwrap();
    let psi0 = Field::zeros(3, &grid);
    let err = simulate_pde(&unit_linear(), &grid, &psi0, &Schedule::new(1.0, TimeStep::Fixed(0.01), None).unwrap())
        .unwrap_err();
    assert!(matches!(err, Error::UnstableStep { .. }));
    assert!(!err.is_config_error());
}

#[test]
fn non_positive_diffusion_is_rejected() {
    let sys = NonlinearCyclicSystem::new(
        vec![ScalarFn::linear(1.0).unwrap()],
        vec![ScalarFn::linear(1.0).unwrap()],
        Some(vec![ScalarFn::linear(1.0).unwrap()]),
    )
    .unwrap();
    let grid = SpatialGrid::new(11).unwrap();
    let psi0 = Field::from_fn(1, &grid, |_, xi| xi - 0.5);
    let err = simulate_pde(&sys, &grid, &psi0, &Schedule::new(0.1, TimeStep::Auto, None).unwrap()).unwrap_err();
    assert!(matches!(err, Error::NonPositiveDiffusion { component: 1, .. }));
}

#[test]
fn mapk_equilibrium() {
    let sys = MapkParams::default().system().unwrap();
    let eq = equilibrium_solve(&sys, &[0.5; 3]).unwrap();
    for (a, b) in eq.x.iter().zip([0.5501, 0.2821, 0.1272]) {
        assert!((a - b).abs() < 5e-5);
    }
    assert!(eq.residual < 1e-12);
    let r = lumped_rhs(&sys, &eq.x).unwrap();
    assert!(r.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn csv_layout() {
    let grid = SpatialGrid::new(5).unwrap();
    let psi0 = Field::from_fn(3, &grid, |_, xi| xi);
    let traj = simulate_pde(&unit_linear(), &grid, &psi0, &Schedule::new(0.1, TimeStep::Auto, Some(0.05)).unwrap())
        .unwrap();
    let mut buf = Vec::new();
    write_pde_csv(&traj, &grid, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,xi,psi_1,psi_2,psi_3");
    assert_eq!(lines.count(), 3 * 5);
}
