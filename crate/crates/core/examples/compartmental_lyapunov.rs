//! Monotone decrease of the summed storage function across diffusively
//! coupled compartments.

use cyclostab::lyapunov::{monitor_decrease, LyapunovWeights, MonitorOptions};
use cyclostab::model::{check_compartmental, CompartmentalSystem, ConditionOptions, Interval, NonlinearCyclicSystem, ScalarFn};
use cyclostab::ode::simulate_ode;
use cyclostab::trajectory::{Schedule, TimeStep};

fn main() -> cyclostab::Result<()> {
    let f = vec![ScalarFn::linear(1.0)?; 3];
    // g_2(s) = s/(2+s): saturating, increasing through the origin
    let g = vec![
        ScalarFn::linear(1.5)?,
        ScalarFn::michaelis_menten(2.0, 1.0)?.shifted(1.0),
        ScalarFn::linear(1.2)?,
    ];
    let base = NonlinearCyclicSystem::lumped(f, g)?;
    let m = 4;
    let sys = CompartmentalSystem::uniform(m, base, vec![ScalarFn::linear(0.3)?; 3])?;

    let report = check_compartmental(&sys, &[Interval::new(-0.9, 3.0)?], ConditionOptions::default())?;
    let gains = report.certified_gains().expect("sector gains on the sampled interval");
    println!("C1 {} C2 {} C5 {} C7 {:?}; certified gains {gains:.4?}", report.c1, report.c2, report.c5, report.c7);

    let weights = LyapunovWeights::new(cyclostab::model::GainVector::new(gains)?)?;
    let x0: Vec<f64> = (0..m * 3).map(|k| 0.8 * ((k as f64) * 1.3).sin()).collect();
    let traj = simulate_ode(&sys, &x0, &Schedule::new(30.0, TimeStep::Auto, Some(0.01))?)?;
    let mon = monitor_decrease(&traj, None, &weights, sys.base().g(), &MonitorOptions::default())?;
    println!(
        "V {:.4} -> {:.3e}; violations {}; median rate ratio {:.3}",
        mon.v_initial,
        mon.v_final,
        mon.violations.len(),
        mon.empirical_rate_quantiles.get(2).copied().unwrap_or(f64::NAN)
    );
    Ok(())
}
