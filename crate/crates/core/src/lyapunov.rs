//! Storage functions, the decoupled Lyapunov function, its monitoring along
//! trajectories, and the Jensen-type lower bound.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::model::{GainVector, ScalarFn};
use crate::pde::{Field, SpatialGrid};
use crate::secant::{diagonal_scaling, secant_satisfied};
use crate::trajectory::{Layout, Trajectory};

/// Weights `d_i` of the decoupled Lyapunov function together with the gains
/// they were derived from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovWeights {
    d: Vec<f64>,
    gamma: GainVector,
    lambda_min: f64,
}

impl LyapunovWeights {
    /// Builds `D = Γ⁻²` from the certified gains; refuses when the secant
    /// bound fails, since no positive λ_min(Q) is then available.
    pub fn new(gamma: GainVector) -> Result<Self> {
        let check = secant_satisfied(&gamma);
        if !check.holds {
            return Err(Error::WeightsPrecondition {
                product: check.product,
                threshold: check.threshold,
            });
        }
        let scaling = diagonal_scaling(&gamma)?;
        Ok(Self {
            d: scaling.d,
            gamma,
            lambda_min: scaling.lambda_min,
        })
    }

    /// Explicit weights, bypassing the scaling construction.
    pub fn from_parts(d: Vec<f64>, gamma: GainVector, lambda_min: f64) -> Result<Self> {
        check_len("weights d", gamma.n(), d.len())?;
        if d.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::invalid("d", "weights must be positive"));
        }
        Ok(Self { d, gamma, lambda_min })
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn gamma(&self) -> &GainVector {
        &self.gamma
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    fn coefficient(&self, i: usize) -> f64 {
        self.d[i] * self.gamma.as_slice()[i]
    }
}

/// `γ ∫_Ω ∫₀^{ψ(ξ)} g` with trapezoid quadrature in ξ.
pub fn storage_pde(psi_i: &[f64], g: &ScalarFn, gamma: f64, grid: &SpatialGrid) -> Result<f64> {
    check_len("field nodes", grid.nodes(), psi_i.len())?;
    let w = grid.weights();
    let mut total = 0.0;
    for (v, w) in psi_i.iter().zip(&w) {
        total += w * g.antiderivative(*v)?;
    }
    Ok(gamma * total)
}

/// State on which the Lyapunov function is evaluated.
#[derive(Debug, Clone, Copy)]
pub enum LyapunovState<'a> {
    Field(&'a Field, &'a SpatialGrid),
    /// Compartment-major `m × n` values.
    Compartments { x: &'a [f64], m: usize },
    Lumped(&'a [f64]),
}

fn check_g(weights: &LyapunovWeights, g: &[ScalarFn]) -> Result<()> {
    check_len("coupling functions g", weights.n(), g.len())
}

/// `Σ_i d_i γ_i ∫₀^{x_i} g_i` for one well-mixed state.
fn lumped_v(x: &[f64], weights: &LyapunovWeights, g: &[ScalarFn]) -> Result<f64> {
    let mut v = 0.0;
    for (i, gi) in g.iter().enumerate() {
        v += weights.coefficient(i) * gi.antiderivative(x[i])?;
    }
    Ok(v)
}

/// Weighted sum of storage functions over components, and over compartments
/// for compartmental states.
pub fn total_v(state: LyapunovState<'_>, weights: &LyapunovWeights, g: &[ScalarFn]) -> Result<f64> {
    check_g(weights, g)?;
    let n = weights.n();
    match state {
        LyapunovState::Field(psi, grid) => {
            check_len("field components", n, psi.n())?;
            let mut v = 0.0;
            for (i, gi) in g.iter().enumerate() {
                v += weights.d[i] * storage_pde(psi.component(i), gi, weights.gamma.as_slice()[i], grid)?;
            }
            Ok(v)
        }
        LyapunovState::Compartments { x, m } => {
            check_len("compartment state", m * n, x.len())?;
            x.chunks(n).map(|xj| lumped_v(xj, weights, g)).sum()
        }
        LyapunovState::Lumped(x) => {
            check_len("state", n, x.len())?;
            lumped_v(x, weights, g)
        }
    }
}

/// `‖y‖²` with `y_i = g_i(ψ_i)`, using the same quadrature as the storage.
pub fn output_norm_sq(state: LyapunovState<'_>, g: &[ScalarFn]) -> Result<f64> {
    let n = g.len();
    match state {
        LyapunovState::Field(psi, grid) => {
            check_len("field components", n, psi.n())?;
            let w = grid.weights();
            let mut total = 0.0;
            for (i, gi) in g.iter().enumerate() {
                for (v, w) in psi.component(i).iter().zip(&w) {
                    total += w * gi.eval(*v)?.powi(2);
                }
            }
            Ok(total)
        }
        LyapunovState::Compartments { x, .. } | LyapunovState::Lumped(x) => {
            let mut total = 0.0;
            for (k, v) in x.iter().enumerate() {
                total += g[k % n].eval(*v)?.powi(2);
            }
            Ok(total)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonitorOptions {
    pub tol_abs: f64,
    pub tol_rel: f64,
    /// Fraction of the guaranteed rate `λ_min(Q)·‖y‖²` demanded of the
    /// empirical decrease.
    pub rate_factor: f64,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        Self {
            tol_abs: 1e-9,
            tol_rel: 1e-6,
            rate_factor: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecreaseViolation {
    pub t: f64,
    pub delta_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorReport {
    pub lambda_min: f64,
    pub violations: Vec<DecreaseViolation>,
    pub max_violation: f64,
    pub v_initial: f64,
    pub v_final: f64,
    /// Number of sampling intervals.
    pub rate_samples: usize,
    /// Fraction of intervals with `ΔV/Δt ≤ -rate_factor·λ_min(Q)·‖y‖² + slack`.
    pub rate_fraction: f64,
    /// Same comparison against the sharp guarantee `½λ_min(Q)·‖y‖²`: for
    /// `V = Σ d_i γ_i ∫∫ g_i` the sector estimate gives `V̇ ≤ yᵀDĀ₀y = -½yᵀQy`.
    pub half_rate_fraction: f64,
    /// 5/25/50/75/95 % quantiles of `(ΔV/Δt) / (λ_min(Q)·‖y‖²)`.
    pub empirical_rate_quantiles: Vec<f64>,
}

impl MonitorReport {
    pub fn decreasing(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates V along a stored trajectory and flags every increase beyond
/// `tol_abs + tol_rel·V`; compares finite-difference rates with the bound
/// `-rate_factor·λ_min(Q)·‖y‖²` (averaged over both interval ends), with the
/// slack `(tol_abs + tol_rel·V)/Δt`; quantiles only use intervals where
/// `λ_min(Q)·‖y‖²` exceeds 1e-14.
pub fn monitor_decrease(
    traj: &Trajectory,
    grid: Option<&SpatialGrid>,
    weights: &LyapunovWeights,
    g: &[ScalarFn],
    opts: &MonitorOptions,
) -> Result<MonitorReport> {
    check_g(weights, g)?;
    let layout = traj.layout();
    let n = weights.n();
    let mut fields = Vec::new();
    if let Layout::Field { n: fn_, nodes } = layout {
        let grid = grid.ok_or_else(|| Error::invalid("grid", "field trajectories need their grid"))?;
        check_len("grid nodes", nodes, grid.nodes())?;
        check_len("field components", n, fn_)?;
        for s in traj.states() {
            fields.push(Field::from_flat(n, grid, s.clone())?);
        }
    }
    let state_at = |k: usize| -> LyapunovState<'_> {
        match layout {
            Layout::Field { .. } => LyapunovState::Field(&fields[k], grid.expect("checked")),
            Layout::Compartments { m, .. } => LyapunovState::Compartments { x: traj.state(k), m },
            Layout::Lumped { .. } => LyapunovState::Lumped(traj.state(k)),
        }
    };

    let mut vs = Vec::with_capacity(traj.len());
    let mut ys = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let st = state_at(k);
        vs.push(total_v(st, weights, g)?);
        ys.push(output_norm_sq(st, g)?);
    }

    let lambda = weights.lambda_min;
    let mut violations = Vec::new();
    let mut max_violation = 0.0_f64;
    let mut ratios = Vec::new();
    let mut rate_ok = 0usize;
    let mut half_ok = 0usize;
    let times = traj.times();
    for k in 0..traj.len().saturating_sub(1) {
        let dt = times[k + 1] - times[k];
        let dv = vs[k + 1] - vs[k];
        let tol = opts.tol_abs + opts.tol_rel * vs[k].abs();
        if dv > tol {
            violations.push(DecreaseViolation { t: times[k + 1], delta_v: dv });
        }
        max_violation = max_violation.max(dv);
        let y2 = 0.5 * (ys[k] + ys[k + 1]);
        let scale = lambda * y2;
        let rate = dv / dt;
        if scale > 1e-14 {
            ratios.push(rate / scale);
        }
        if rate <= -opts.rate_factor * scale + tol / dt {
            rate_ok += 1;
        }
        if rate <= -0.5 * opts.rate_factor * scale + tol / dt {
            half_ok += 1;
        }
    }
    let rate_samples = traj.len().saturating_sub(1);
    let fraction = |ok: usize| if rate_samples == 0 { 1.0 } else { ok as f64 / rate_samples as f64 };
    Ok(MonitorReport {
        lambda_min: lambda,
        violations,
        max_violation,
        v_initial: vs.first().copied().unwrap_or(0.0),
        v_final: vs.last().copied().unwrap_or(0.0),
        rate_samples,
        rate_fraction: fraction(rate_ok),
        half_rate_fraction: fraction(half_ok),
        empirical_rate_quantiles: quantiles(&mut ratios, &[0.05, 0.25, 0.5, 0.75, 0.95]),
    })
}

fn quantiles(values: &mut [f64], qs: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    values.sort_by(f64::total_cmp);
    let last = (values.len() - 1) as f64;
    qs.iter()
        .map(|q| {
            let pos = q * last;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let frac = pos - lo as f64;
            values[lo] + frac * (values[hi] - values[lo])
        })
        .collect()
}

/// Convex lower bound on [`storage_pde`]: nodes are split by sign, each part
/// contributes `|Ω_±|·p_±(‖ψ‖_{1,Ω_±}/|Ω_±|)` where `p_+(s) = ∫₀^s g` and
/// `p_-(s) = ∫₀^{-s} g`. Measures and restricted L1 norms use trapezoid weights.
pub fn jensen_lower_bound(psi_i: &[f64], g: &ScalarFn, gamma: f64, grid: &SpatialGrid) -> Result<f64> {
    check_len("field nodes", grid.nodes(), psi_i.len())?;
    let w = grid.weights();
    let (mut mp, mut lp, mut mm, mut lm) = (0.0, 0.0, 0.0, 0.0);
    for (v, w) in psi_i.iter().zip(&w) {
        if *v > 0.0 {
            mp += w;
            lp += w * v;
        } else if *v < 0.0 {
            mm += w;
            lm += w * -v;
        }
    }
    let mut bound = 0.0;
    if mp > 0.0 {
        bound += mp * g.antiderivative(lp / mp)?;
    }
    if mm > 0.0 {
        bound += mm * g.antiderivative(-(lm / mm))?;
    }
    Ok(gamma * bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_weights() -> LyapunovWeights {
        LyapunovWeights::new(GainVector::new(vec![1.0; 3]).unwrap()).unwrap()
    }

    #[test]
    fn weights_refuse_failing_secant() {
        let err = LyapunovWeights::new(GainVector::new(vec![2.0, 2.0, 2.5]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::WeightsPrecondition { .. }));
    }

    #[test]
    fn storage_of_constant_linear_field() {
        let grid = SpatialGrid::new(11).unwrap();
        let psi = vec![0.7; 11];
        let g = ScalarFn::Linear { slope: 3.0 };
        let v = storage_pde(&psi, &g, 2.0, &grid).unwrap();
        assert!((v - 2.0 * 3.0 * 0.49 / 2.0).abs() < 1e-14);
        assert_eq!(storage_pde(&[0.0; 11], &g, 2.0, &grid).unwrap(), 0.0);
    }

    #[test]
    fn storage_of_cosine() {
        let grid = SpatialGrid::new(201).unwrap();
        let psi: Vec<f64> = grid.points().iter().map(|x| (PI * x).cos()).collect();
        let v = storage_pde(&psi, &ScalarFn::Linear { slope: 1.0 }, 1.0, &grid).unwrap();
        assert!((v - 0.25).abs() < 1e-4);
    }

    #[test]
    fn total_v_of_unit_fields() {
        let grid = SpatialGrid::new(5).unwrap();
        let w = LyapunovWeights::from_parts(vec![1.0; 3], GainVector::new(vec![1.0; 3]).unwrap(), 1.0).unwrap();
        let g = vec![ScalarFn::Linear { slope: 1.0 }; 3];
        let psi = Field::uniform(&[1.0; 3], &grid);
        let v = total_v(LyapunovState::Field(&psi, &grid), &w, &g).unwrap();
        assert!((v - 1.5).abs() < 1e-14);
        let zero = Field::zeros(3, &grid);
        assert_eq!(total_v(LyapunovState::Field(&zero, &grid), &w, &g).unwrap(), 0.0);
    }

    #[test]
    fn one_compartment_equals_lumped() {
        let w = unit_weights();
        let g = vec![ScalarFn::Linear { slope: 1.0 }; 3];
        let x = [0.3, -0.4, 1.2];
        let a = total_v(LyapunovState::Compartments { x: &x, m: 1 }, &w, &g).unwrap();
        let b = total_v(LyapunovState::Lumped(&x), &w, &g).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn equilibrium_trajectory_has_no_violations() {
        let tr = Trajectory::from_samples(
            vec![0.0, 1.0, 2.0],
            vec![vec![0.0; 3]; 3],
            Layout::Lumped { n: 3 },
        )
        .unwrap();
        let g = vec![ScalarFn::Linear { slope: 1.0 }; 3];
        let r = monitor_decrease(&tr, None, &unit_weights(), &g, &MonitorOptions::default()).unwrap();
        assert!(r.decreasing());
        assert_eq!(r.v_final, 0.0);
        assert!(r.empirical_rate_quantiles.is_empty());
        assert_eq!(r.rate_fraction, 1.0);
    }

    #[test]
    fn increase_is_flagged() {
        let tr = Trajectory::from_samples(
            vec![0.0, 1.0],
            vec![vec![0.1, 0.0, 0.0], vec![0.2, 0.0, 0.0]],
            Layout::Lumped { n: 3 },
        )
        .unwrap();
        let g = vec![ScalarFn::Linear { slope: 1.0 }; 3];
        let r = monitor_decrease(&tr, None, &unit_weights(), &g, &MonitorOptions::default()).unwrap();
        assert_eq!(r.violations.len(), 1);
        assert!(r.max_violation > 0.0);
    }

    #[test]
    fn jensen_equality_on_constants() {
        let grid = SpatialGrid::new(21).unwrap();
        let g = ScalarFn::michaelis_menten(1.0, 0.5).unwrap();
        for s in [0.3, -0.2] {
            let psi = vec![s; 21];
            let a = jensen_lower_bound(&psi, &g, 1.5, &grid).unwrap();
            let b = storage_pde(&psi, &g, 1.5, &grid).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(jensen_lower_bound(&[0.0; 21], &g, 1.0, &grid).unwrap(), 0.0);
    }

    #[test]
    fn jensen_strict_on_sign_mixed_profile() {
        let grid = SpatialGrid::new(101).unwrap();
        let psi: Vec<f64> = grid.points().iter().map(|x| 2.0 * x - 1.0).collect();
        let g = ScalarFn::Linear { slope: 1.0 };
        let lower = jensen_lower_bound(&psi, &g, 1.0, &grid).unwrap();
        let v = storage_pde(&psi, &g, 1.0, &grid).unwrap();
        // exact values: ∫(2ξ-1)²/2 = 1/6 and 2·(1/2)·(1/2)²/2 = 1/8
        assert!((v - 1.0 / 6.0).abs() < 1e-4);
        assert!((lower - 0.125).abs() < 2e-3);
        assert!(lower < v);
    }
}
