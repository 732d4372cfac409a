//! Convex lower bound on the storage function from sign-split L1 norms.

use std::f64::consts::PI;

use cyclostab::lyapunov::{jensen_lower_bound, storage_pde};
use cyclostab::model::ScalarFn;
use cyclostab::pde::SpatialGrid;

fn main() -> cyclostab::Result<()> {
    let grid = SpatialGrid::new(201)?;
    let g_fns = [
        ScalarFn::linear(1.0)?,
        ScalarFn::michaelis_menten(1.0, 1.0)?.shifted(1.0),
        ScalarFn::inhibitory_hill(1.0, 1.0, 1)?.shifted(1.0).scaled(-1.0),
    ];
    type Profile = (&'static str, fn(f64) -> f64);
    let profiles: [Profile; 3] = [
        ("2xi - 1", |xi| 2.0 * xi - 1.0),
        ("0.7 cos(pi xi)", |xi| 0.7 * (PI * xi).cos()),
        ("constant 0.4", |_| 0.4),
    ];
    for g in &g_fns {
        for (label, p) in &profiles {
            let psi: Vec<f64> = grid.points().into_iter().map(p).collect();
            let v = storage_pde(&psi, g, 1.0, &grid)?;
            let lb = jensen_lower_bound(&psi, g, 1.0, &grid)?;
            println!("{:<16} {:<16} V = {v:.6}  bound = {lb:.6}  gap = {:.2e}", g.kind_name(), label, v - lb);
        }
    }
    Ok(())
}
