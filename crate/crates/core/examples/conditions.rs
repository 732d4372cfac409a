//! Sample-based sector and monotonicity certificates.

use cyclostab::model::presets::counterexample;
use cyclostab::model::{check_conditions, Interval, MapkParams};
use cyclostab::pde::equilibrium_solve;

fn main() -> cyclostab::Result<()> {
    let shifted = counterexample().shifted(&[1.0, 1.0, 1.0])?;
    let r = check_conditions(&shifted, Interval::new(-0.9, 5.0)?, 401)?;
    println!("counterexample on [-0.9, 5]: C1 {} C2 {} C4 {} C5 {}", r.c1, r.c2, r.c4, r.c5);
    println!("  empirical gains {:?}", r.gamma);

    let params = MapkParams::default();
    let sys = params.system()?;
    let eq = equilibrium_solve(&sys, &[0.5, 0.5, 0.5])?;
    let shifted = sys.shifted(&eq.x)?;
    let intervals: Vec<Interval> = eq.x.iter().map(|x| Interval::new(-x, 1.0 - x)).collect::<Result<_, _>>()?;
    let opts = cyclostab::model::ConditionOptions::default();
    let r = cyclostab::model::check_conditions_on(&shifted, &intervals, opts)?;
    println!("cascade on [0, 1]^3: C1 {} C2 {} C5 {}", r.c1, r.c2, r.c5);
    println!("  sampled gains {:.4?} vs closed form {:?}", r.gamma, params.gains()?.as_slice());
    Ok(())
}
