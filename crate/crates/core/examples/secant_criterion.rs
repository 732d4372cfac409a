//! Secant thresholds and the diagonal Lyapunov certificate for a few gain vectors.

use cyclostab::model::GainVector;
use cyclostab::secant::{diagonal_scaling, secant_satisfied, secant_threshold};

fn main() -> cyclostab::Result<()> {
    println!("{:>3}  {:>14}", "n", "sec(pi/n)^n");
    for n in 1..=8 {
        println!("{n:>3}  {:>14.6}", secant_threshold(n)?);
    }

    let cases = [
        vec![1.0, 1.0, 1.0],
        vec![1.6, 1.6, 0.4],
        vec![2.0, 2.0, 1.9],
        vec![2.0, 2.0, 2.1],
        vec![0.5, 3.0, 1.0, 2.0, 1.5],
    ];
    println!();
    for gains in cases {
        let g = GainVector::new(gains.clone())?;
        let check = secant_satisfied(&g);
        let scaling = diagonal_scaling(&g)?;
        println!(
            "gains {gains:?}: product {:.4} vs {:.4} -> holds={} lambda_min(Q)={:+.6} d={:.4?}",
            check.product, check.threshold, check.holds, scaling.lambda_min, scaling.d
        );
    }
    Ok(())
}
