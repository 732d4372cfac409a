//! Modal Lyapunov matrices of the linear reaction-diffusion operator and
//! their perturbation bounds.

use cyclostab::model::LinearCyclicSystem;
use cyclostab::secant::verify_modal_series;

fn main() -> cyclostab::Result<()> {
    let sys = LinearCyclicSystem::new(vec![1.0, 2.0, 0.5], vec![1.5, 1.0, 2.0], vec![1.0, 0.2, 0.5])?;
    let report = verify_modal_series(&sys, 30)?;
    println!(
        "gains {:?}, product {:.4} < {:.4}: {} ({:?})",
        report.gains, report.product, report.threshold, report.holds, report.criterion
    );
    println!("{:>3} {:>12} {:>12} {:>12} {:>10}", "k", "abscissa", "|P_k|", "bound", "residual");
    for m in report.per_mode.iter().filter(|m| m.k < 6 || m.k % 5 == 0) {
        let bound = m.bound.and_then(|b| b.value()).map_or("-".to_string(), |b| format!("{b:.3e}"));
        println!(
            "{:>3} {:>12.4} {:>12.3e} {:>12} {:>10.1e}",
            m.k,
            m.abscissa,
            m.p_norm.unwrap_or(f64::NAN),
            bound,
            m.residual.unwrap_or(f64::NAN)
        );
    }
    println!("sup_k |P_k| = {:.4e}, all within bound: {}", report.sup_p_norm.unwrap_or(f64::NAN), report.all_within_bound());
    Ok(())
}
