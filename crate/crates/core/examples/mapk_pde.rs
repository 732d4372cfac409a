//! Kinase cascade with slow diffusion: equilibrium, simulation in shifted
//! coordinates and Lyapunov monitoring.

use std::f64::consts::PI;

use cyclostab::lyapunov::{monitor_decrease, LyapunovWeights, MonitorOptions};
use cyclostab::model::MapkParams;
use cyclostab::pde::{equilibrium_solve, field_at, simulate_pde, Field, SpatialGrid};
use cyclostab::trajectory::{Schedule, TimeStep};

fn main() -> cyclostab::Result<()> {
    let params = MapkParams::default();
    let sys = params.system()?;
    let eq = equilibrium_solve(&sys, &[0.5, 0.5, 0.5])?;
    println!("equilibrium {:.6?} (residual {:.1e})", eq.x, eq.residual);

    let shifted = sys.shifted(&eq.x)?;
    let grid = SpatialGrid::new(101)?;
    let psi0 = Field::from_fn(3, &grid, |i, xi| {
        let raw = match i {
            0 => 16.0 * xi.powi(2) * (1.0 - xi.powi(2)).powi(2),
            1 => 5.0 + (PI * xi).cos(),
            _ => 2.0,
        };
        raw - eq.x[i]
    });
    let traj = simulate_pde(&shifted, &grid, &psi0, &Schedule::new(200.0, TimeStep::Auto, Some(0.5))?)?;
    let last = field_at(&traj, traj.len() - 1, &grid)?;
    println!("max |psi| at t = 200: {:.2e}", last.max_abs());

    let weights = LyapunovWeights::new(params.gains()?)?;
    let report = monitor_decrease(&traj, Some(&grid), &weights, shifted.g(), &MonitorOptions::default())?;
    println!(
        "V: {:.4} -> {:.2e}, violations {}, lambda_min(Q) {:.4}, rate quantiles {:.3?}",
        report.v_initial,
        report.v_final,
        report.violations.len(),
        report.lambda_min,
        report.empirical_rate_quantiles
    );
    Ok(())
}
