//! Sample-based certificates for the sector, growth and monotonicity
//! conditions on cyclic systems.
//!
//! Every check evaluates the functions on a uniform grid (endpoints included)
//! and records each failing sample, so a negative verdict is reproducible from
//! the report alone.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CompartmentalSystem, NonlinearCyclicSystem, ScalarFn};

/// Closed sampling interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid("interval", format!("need finite lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// `samples` equally spaced points from `lo` to `hi` inclusive.
    pub fn grid(&self, samples: usize) -> Vec<f64> {
        let step = (self.hi - self.lo) / (samples - 1) as f64;
        (0..samples)
            .map(|k| if k + 1 == samples { self.hi } else { self.lo + step * k as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    /// σ f(σ) > 0 and σ g(σ) > 0 for σ ≠ 0.
    C1,
    /// g(σ)/f(σ) ≤ γ.
    C2,
    /// ∫₀^σ g → ∞ as |σ| → ∞ (surrogate: growth at the interval ends).
    C4,
    /// h > 0 and g nondecreasing.
    C5,
    /// σ μ(σ) ≥ 0.
    C7,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    /// Zero-based subsystem index (species index for C7).
    pub component: usize,
    /// Zero-based interface index for C7 violations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interface: Option<usize>,
    pub sigma: f64,
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionOptions {
    pub samples: usize,
    /// Minimum value ∫₀^σ g must reach at the interval ends for C4.
    pub growth_threshold: f64,
}

impl Default for ConditionOptions {
    fn default() -> Self {
        Self {
            samples: 201,
            growth_threshold: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub intervals: Vec<Interval>,
    pub samples: usize,
    pub c1: bool,
    pub c2: bool,
    /// Empirical sup of g_i/f_i; `None` when unbounded on the grid.
    pub gamma: Vec<Option<f64>>,
    pub c4: bool,
    pub c5: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c7: Option<bool>,
    pub violations: Vec<Violation>,
}

impl ConditionReport {
    pub fn violations_of(&self, condition: Condition) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.condition == condition)
    }

    /// Certified gains, when C2 holds with strictly positive suprema.
    pub fn certified_gains(&self) -> Option<Vec<f64>> {
        self.gamma
            .iter()
            .map(|g| g.filter(|v| *v > 0.0))
            .collect()
    }
}

/// Checks C1, C2, C4 and C5 on one interval shared by all components.
pub fn check_conditions(
    sys: &NonlinearCyclicSystem,
    interval: Interval,
    samples: usize,
) -> Result<ConditionReport> {
    let opts = ConditionOptions {
        samples,
        ..ConditionOptions::default()
    };
    check_conditions_on(sys, &[interval], opts)
}

/// Checks C1, C2, C4 and C5 with one interval per component (or a single
/// interval broadcast to all).
pub fn check_conditions_on(
    sys: &NonlinearCyclicSystem,
    intervals: &[Interval],
    opts: ConditionOptions,
) -> Result<ConditionReport> {
    if opts.samples < 10 {
        return Err(Error::invalid("samples", format!("need at least 10, got {}", opts.samples)));
    }
    let n = sys.n();
    let intervals: Vec<Interval> = match intervals.len() {
        1 => vec![intervals[0]; n],
        len if len == n => intervals.to_vec(),
        len => {
            return Err(Error::DimensionMismatch {
                what: "sampling intervals",
                expected: n,
                got: len,
            })
        }
    };

    let mut violations = Vec::new();
    let mut gamma = Vec::with_capacity(n);
    for i in 0..n {
        let grid = intervals[i].grid(opts.samples);
        let zero_band = 1e-12 * intervals[i].lo.abs().max(intervals[i].hi.abs());
        let f = &sys.f()[i];
        let g = &sys.g()[i];
        let mut sup: Option<f64> = None;
        let mut unbounded = false;
        for &s in &grid {
            if s.abs() <= zero_band {
                continue;
            }
            let fv = f.eval(s)?;
            let gv = g.eval(s)?;
            if !(s * fv > 0.0) {
                violations.push(violation(Condition::C1, i, s, fv, "sigma * f(sigma) <= 0"));
            }
            if !(s * gv > 0.0) {
                violations.push(violation(Condition::C1, i, s, gv, "sigma * g(sigma) <= 0"));
            }
            if fv == 0.0 {
                unbounded = true;
                violations.push(violation(Condition::C2, i, s, gv, "unbounded: f(sigma) = 0"));
            } else {
                let ratio = gv / fv;
                sup = Some(sup.map_or(ratio, |m: f64| m.max(ratio)));
            }
        }
        gamma.push(if unbounded { None } else { sup });

        for &s in &grid {
            let slope = g.derivative(s)?;
            if slope < -1e-12 * (1.0 + slope.abs()) {
                violations.push(violation(Condition::C5, i, s, slope, "g is decreasing"));
            }
            if let Some(h) = sys.h() {
                let hv = h[i].eval(s)?;
                if !(hv > 0.0) {
                    violations.push(violation(Condition::C5, i, s, hv, "h <= 0"));
                }
            }
        }

        for end in [intervals[i].lo, intervals[i].hi] {
            if end.abs() <= zero_band {
                continue;
            }
            let p = g.antiderivative(end)?;
            if !(p > opts.growth_threshold) {
                violations.push(violation(
                    Condition::C4,
                    i,
                    end,
                    p,
                    "antiderivative of g below growth threshold",
                ));
            }
        }
    }

    let holds = |c: Condition| !violations.iter().any(|v| v.condition == c);
    Ok(ConditionReport {
        intervals,
        samples: opts.samples,
        c1: holds(Condition::C1),
        c2: holds(Condition::C2),
        gamma,
        c4: holds(Condition::C4),
        c5: holds(Condition::C5),
        c7: None,
        violations,
    })
}

/// C7 for one flux function: σ μ(σ) ≥ 0 on the grid.
pub fn check_flux(mu: &ScalarFn, interval: Interval, samples: usize) -> Result<Vec<(f64, f64)>> {
    let mut bad = Vec::new();
    for s in interval.grid(samples.max(2)) {
        let v = mu.eval(s)?;
        if !(s * v >= 0.0) {
            bad.push((s, v));
        }
    }
    Ok(bad)
}

/// All conditions of the compartmental stability result: C1, C2, C4 and C5
/// on the shared reaction functions plus C7 on every flux.
pub fn check_compartmental(
    sys: &CompartmentalSystem,
    intervals: &[Interval],
    opts: ConditionOptions,
) -> Result<ConditionReport> {
    let mut report = check_conditions_on(sys.base(), intervals, opts)?;
    let mut c7 = true;
    // flux arguments are differences of states, so sample the widest span
    let span = report
        .intervals
        .iter()
        .fold(0.0_f64, |m, iv| m.max(iv.hi - iv.lo));
    let diff_interval = Interval::new(-span, span)?;
    for (j, row) in sys.flux().iter().enumerate() {
        for (i, mu) in row.iter().enumerate() {
            for (s, v) in check_flux(mu, diff_interval, opts.samples)? {
                c7 = false;
                report.violations.push(Violation {
                    condition: Condition::C7,
                    component: i,
                    interface: Some(j),
                    sigma: s,
                    value: v,
                    detail: "sigma * mu(sigma) < 0".into(),
                });
            }
        }
    }
    report.c7 = Some(c7);
    Ok(report)
}

fn violation(condition: Condition, component: usize, sigma: f64, value: f64, detail: &str) -> Violation {
    Violation {
        condition,
        component,
        interface: None,
        sigma,
        value,
        detail: detail.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_system() -> NonlinearCyclicSystem {
        let lin = || vec![ScalarFn::linear(1.0).unwrap(); 3];
        NonlinearCyclicSystem::new(lin(), lin(), Some(vec![ScalarFn::constant(1.0).unwrap(); 3])).unwrap()
    }

    #[test]
    fn identity_ratio_holds_everything() {
        let r = check_conditions(&identity_system(), Interval::new(-2.0, 3.0).unwrap(), 50).unwrap();
        assert!(r.c1 && r.c2 && r.c4 && r.c5);
        assert!(r.violations.is_empty());
        for g in &r.gamma {
            assert!((g.unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn negative_coupling_fails_c1_at_every_positive_sample() {
        let f = vec![ScalarFn::linear(1.0).unwrap()];
        let g = vec![ScalarFn::linear(-1.0).unwrap()];
        let sys = NonlinearCyclicSystem::lumped(f, g).unwrap();
        let iv = Interval::new(-1.0, 1.0).unwrap();
        let r = check_conditions(&sys, iv, 21).unwrap();
        assert!(!r.c1);
        let positive = iv.grid(21).into_iter().filter(|s| *s > 1e-12).count();
        let flagged = r
            .violations_of(Condition::C1)
            .filter(|v| v.sigma > 0.0)
            .count();
        assert_eq!(flagged, positive);
    }

    #[test]
    fn zero_f_marks_c2_unbounded() {
        let f = vec![ScalarFn::tabulated(vec![-1.0, 0.5, 1.0], vec![-1.0, 0.0, 0.0]).unwrap()];
        let g = vec![ScalarFn::linear(1.0).unwrap()];
        let sys = NonlinearCyclicSystem::lumped(f, g).unwrap();
        let r = check_conditions(&sys, Interval::new(-1.0, 1.0).unwrap(), 21).unwrap();
        assert!(!r.c2);
        assert_eq!(r.gamma[0], None);
        assert!(r.violations_of(Condition::C2).all(|v| v.sigma >= 0.5));
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(check_conditions(&identity_system(), Interval::new(-1.0, 1.0).unwrap(), 5).is_err());
    }

    #[test]
    fn flux_sign_condition() {
        let iv = Interval::new(-2.0, 2.0).unwrap();
        for d in [0.0, 1e-4, 3.0] {
            assert!(check_flux(&ScalarFn::linear(d).unwrap(), iv, 41).unwrap().is_empty());
        }
        assert!(!check_flux(&ScalarFn::linear(-0.5).unwrap(), iv, 41).unwrap().is_empty());
    }

    #[test]
    fn verdict_holds_iff_no_violations() {
        let f = vec![ScalarFn::linear(1.0).unwrap(); 2];
        let g = vec![ScalarFn::linear(1.0).unwrap(), ScalarFn::linear(-0.2).unwrap()];
        let sys = NonlinearCyclicSystem::new(f, g, Some(vec![ScalarFn::constant(-1.0).unwrap(); 2])).unwrap();
        let r = check_conditions(&sys, Interval::new(-1.0, 1.0).unwrap(), 11).unwrap();
        for (flag, c) in [(r.c1, Condition::C1), (r.c2, Condition::C2), (r.c4, Condition::C4), (r.c5, Condition::C5)] {
            assert_eq!(flag, r.violations_of(c).next().is_none());
        }
        assert!(!r.c5);
    }
}
