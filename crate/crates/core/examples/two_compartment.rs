//! Two weakly coupled compartments oscillating with equal periods but very
//! different amplitudes.

use cyclostab::model::presets::two_compartment;
use cyclostab::ode::{detect_oscillation, simulate_ode, OscillationOptions};
use cyclostab::trajectory::{Schedule, TimeStep};

fn main() -> cyclostab::Result<()> {
    let sys = two_compartment(1e-4)?;
    let x0 = [1.4945, 1.3844, 1.0877, 1.0, 1.0, 1.0];
    let traj = simulate_ode(&sys, &x0, &Schedule::new(3000.0, TimeStep::Auto, Some(0.1))?)?;
    let opts = OscillationOptions {
        window: 0.25,
        ..OscillationOptions::default()
    };
    for (label, coord) in [("chi_1", 0), ("eta_1", 3)] {
        let r = detect_oscillation(&traj, coord, &opts)?;
        println!(
            "{label}: oscillating={} period={:.4?} half-range={:.4e} trend={:?}",
            r.oscillating, r.period, r.half_range(), r.trend
        );
    }
    Ok(())
}
