//! Lumped and compartmental ODE simulation and oscillation detection.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::model::{CompartmentalSystem, NonlinearCyclicSystem};
use crate::trajectory::{integrate_rk4, Layout, Schedule, TimeStep, Trajectory};

/// Step used by [`TimeStep::Auto`] for ODE models with O(1) rates.
pub const AUTO_DT: f64 = 1e-3;

/// `ẋ_1 = -f_1(x_1) - g_n(x_n)`, `ẋ_i = -f_i(x_i) + g_{i-1}(x_{i-1})`.
pub fn lumped_rhs(sys: &NonlinearCyclicSystem, x: &[f64]) -> Result<Vec<f64>> {
    sys.reaction(x)
}

/// Reaction terms in every compartment plus the exchange fluxes
/// `μ_{j,i}(x_{j,i} - x_{j+1,i})` leaving compartment `j` into `j + 1`.
pub fn compartmental_rhs_into(sys: &CompartmentalSystem, x: &[f64], out: &mut [f64]) -> Result<()> {
    let n = sys.n();
    for j in 0..sys.m() {
        sys.base()
            .reaction_into(&x[j * n..(j + 1) * n], &mut out[j * n..(j + 1) * n])?;
    }
    for (j, row) in sys.flux().iter().enumerate() {
        for (i, mu) in row.iter().enumerate() {
            let q = mu.eval(x[j * n + i] - x[(j + 1) * n + i])?;
            out[j * n + i] -= q;
            out[(j + 1) * n + i] += q;
        }
    }
    Ok(())
}

pub fn compartmental_rhs(sys: &CompartmentalSystem, x: &[f64]) -> Result<Vec<f64>> {
    check_len("compartment state", sys.m() * sys.n(), x.len())?;
    let mut out = vec![0.0; x.len()];
    compartmental_rhs_into(sys, x, &mut out)?;
    Ok(out)
}

/// Models that can be integrated by [`simulate_ode`].
pub trait OdeModel {
    fn layout(&self) -> Layout;
    fn rhs_into(&self, x: &[f64], out: &mut [f64]) -> Result<()>;
}

impl OdeModel for NonlinearCyclicSystem {
    fn layout(&self) -> Layout {
        Layout::Lumped { n: self.n() }
    }

    fn rhs_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.reaction_into(x, out)
    }
}

impl OdeModel for CompartmentalSystem {
    fn layout(&self) -> Layout {
        Layout::Compartments {
            m: self.m(),
            n: self.n(),
        }
    }

    fn rhs_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        compartmental_rhs_into(self, x, out)
    }
}

/// Fixed-step classical RK4; `TimeStep::Auto` means [`AUTO_DT`].
pub fn simulate_ode<M: OdeModel + ?Sized>(model: &M, x0: &[f64], schedule: &Schedule) -> Result<Trajectory> {
    let layout = model.layout();
    check_len("initial state", layout.len(), x0.len())?;
    let dt = match schedule.dt {
        TimeStep::Auto => AUTO_DT,
        TimeStep::Fixed(dt) => dt,
    };
    integrate_rk4(x0.to_vec(), schedule, layout, |x, out| model.rhs_into(x, out), |_| Ok(dt))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeTrend {
    Growing,
    Sustained,
    Decaying,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OscillationOptions {
    /// Trailing fraction of the trajectory that is analyzed.
    pub window: f64,
    pub min_peaks: usize,
    /// Relative band on the amplitude drift classified as sustained.
    pub trend_band: f64,
    /// Differences at or below this magnitude are treated as flat.
    pub noise_floor: f64,
    pub min_samples: usize,
}

impl Default for OscillationOptions {
    fn default() -> Self {
        Self {
            window: 0.5,
            min_peaks: 3,
            trend_band: 0.01,
            noise_floor: 1e-9,
            min_samples: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationReport {
    pub oscillating: bool,
    pub period: Option<f64>,
    pub peaks: usize,
    pub peak_times: Vec<f64>,
    /// Peak heights above the window mean.
    pub amplitudes: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub trend: Option<AmplitudeTrend>,
}

impl OscillationReport {
    /// Half the peak-to-peak excursion over the window.
    pub fn half_range(&self) -> f64 {
        0.5 * (self.max - self.min)
    }
}

/// Peak statistics of one coordinate over the trailing window.
pub fn detect_oscillation(traj: &Trajectory, coordinate: usize, opts: &OscillationOptions) -> Result<OscillationReport> {
    if !(opts.window > 0.0 && opts.window <= 1.0) {
        return Err(Error::invalid("window", format!("must lie in (0, 1], got {}", opts.window)));
    }
    if coordinate >= traj.layout().len() {
        return Err(Error::invalid("coordinate", format!("index {coordinate} out of range")));
    }
    let times = traj.times();
    let t_first = times[0];
    let t_last = *times.last().expect("non-empty");
    let cut = t_last - opts.window * (t_last - t_first);
    let start = times.partition_point(|&t| t < cut);
    let samples = times.len() - start;
    if samples < opts.min_samples {
        return Err(Error::WindowTooShort {
            samples,
            required: opts.min_samples,
        });
    }
    let values: Vec<f64> = traj.states()[start..].iter().map(|s| s[coordinate]).collect();
    let ts = &times[start..];
    Ok(analyze_signal(ts, &values, opts))
}

fn analyze_signal(ts: &[f64], values: &[f64], opts: &OscillationOptions) -> OscillationReport {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));

    // slope signs with flats removed, remembering where each sign began
    let mut signs: Vec<(i8, usize)> = Vec::new();
    for k in 0..values.len() - 1 {
        let d = values[k + 1] - values[k];
        if d.abs() <= opts.noise_floor {
            continue;
        }
        let s = if d > 0.0 { 1 } else { -1 };
        match signs.last() {
            Some(&(prev, _)) if prev == s => {}
            _ => signs.push((s, k + 1)),
        }
    }
    let mut peak_idx = Vec::new();
    for w in signs.windows(2) {
        if w[0].0 == 1 && w[1].0 == -1 {
            // the sign flips at w[1].1; the maximum sits at its start node
            let k = w[1].1 - 1;
            peak_idx.push(k);
        }
    }
    let peak_times: Vec<f64> = peak_idx.iter().map(|&k| ts[k]).collect();
    let amplitudes: Vec<f64> = peak_idx.iter().map(|&k| values[k] - mean).collect();
    let period = (peak_times.len() >= 2).then(|| {
        (peak_times[peak_times.len() - 1] - peak_times[0]) / (peak_times.len() - 1) as f64
    });
    let trend = (amplitudes.len() >= 2).then(|| {
        let slope = linear_slope(&peak_times, &amplitudes);
        let span = ts[ts.len() - 1] - ts[0];
        let mean_amp = amplitudes.iter().map(|a| a.abs()).sum::<f64>() / amplitudes.len() as f64;
        if (slope * span).abs() < opts.trend_band * mean_amp {
            AmplitudeTrend::Sustained
        } else if slope > 0.0 {
            AmplitudeTrend::Growing
        } else {
            AmplitudeTrend::Decaying
        }
    });
    let oscillating = peak_idx.len() >= opts.min_peaks
        && matches!(trend, Some(AmplitudeTrend::Sustained | AmplitudeTrend::Growing));
    OscillationReport {
        oscillating,
        period,
        peaks: peak_idx.len(),
        peak_times,
        amplitudes,
        min,
        max,
        trend,
    }
}

fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Writes `t,x_1_1,...,x_m_n` preceded by a comment describing the ordering.
pub fn write_ode_csv<W: Write>(traj: &Trajectory, out: &mut W) -> Result<()> {
    let (m, n) = match traj.layout() {
        Layout::Compartments { m, n } => (m, n),
        Layout::Lumped { n } => (1, n),
        Layout::Field { .. } => return Err(Error::invalid("trajectory", "field trajectories use the PDE writer")),
    };
    writeln!(out, "# columns are compartment-major: x_j_i is species i in compartment j")?;
    write!(out, "t")?;
    for j in 1..=m {
        for i in 1..=n {
            write!(out, ",x_{j}_{i}")?;
        }
    }
    writeln!(out)?;
    for (t, s) in traj.times().iter().zip(traj.states()) {
        write!(out, "{t}")?;
        for v in s {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
