//! Locally stable equilibrium coexisting with a limit cycle.

use cyclostab::model::presets::{counterexample, COUNTEREXAMPLE_EQUILIBRIUM};
use cyclostab::model::GainVector;
use cyclostab::ode::{detect_oscillation, simulate_ode, OscillationOptions};
use cyclostab::secant::{hurwitz, secant_satisfied};
use cyclostab::trajectory::{Schedule, TimeStep};

fn main() -> cyclostab::Result<()> {
    let sys = counterexample();
    let x = COUNTEREXAMPLE_EQUILIBRIUM;
    let jac = sys.jacobian(&x)?;
    let gains: Vec<f64> = (0..3)
        .map(|i| Ok(sys.g()[i].derivative(x[i])?.abs() / sys.f()[i].derivative(x[i])?))
        .collect::<cyclostab::Result<_>>()?;
    let check = secant_satisfied(&GainVector::new(gains.clone())?);
    println!("linearized gains {gains:?}: product {} < {:.3} = {}", check.product, check.threshold, check.holds);
    println!("spectral abscissa of the Jacobian: {:.4}", hurwitz(&jac)?.spectral_abscissa);

    let long = Schedule::new(300.0, TimeStep::Auto, Some(0.05))?;
    let traj = simulate_ode(&sys, &[1.2, 1.2, 1.2], &long)?;
    let osc = detect_oscillation(&traj, 0, &OscillationOptions::default())?;
    println!(
        "from (1.2, 1.2, 1.2): oscillating={} peaks={} period={:.3?} half-range={:.3} trend={:?}",
        osc.oscillating, osc.peaks, osc.period, osc.half_range(), osc.trend
    );

    let near = simulate_ode(&sys, &[1.001, 1.0, 1.0], &Schedule::new(1500.0, TimeStep::Auto, Some(1.0))?)?;
    let dist = near
        .last_state()
        .iter()
        .zip(x)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    println!("from (1.001, 1, 1): distance to equilibrium at t = 1500 is {dist:.2e}");
    Ok(())
}
