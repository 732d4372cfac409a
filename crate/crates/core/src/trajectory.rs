//! Time-stepping plumbing shared by the PDE and ODE simulators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible step before integration is abandoned as too stiff.
pub const MIN_STEP: f64 = 1e-12;

/// Step-size policy: a fixed value or a simulator-specific automatic choice.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TimeStep {
    #[default]
    Auto,
    Fixed(f64),
}

impl Serialize for TimeStep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TimeStep::Auto => s.serialize_str("auto"),
            TimeStep::Fixed(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for TimeStep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) if v > 0.0 && v.is_finite() => Ok(TimeStep::Fixed(v)),
            Raw::Number(v) => Err(serde::de::Error::custom(format!("dt must be positive, got {v}"))),
            Raw::Text(s) if s == "auto" => Ok(TimeStep::Auto),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "dt must be a positive number or \"auto\", got \"{s}\""
            ))),
        }
    }
}

/// Horizon, step policy and output cadence of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub t_end: f64,
    pub dt: TimeStep,
    /// Spacing of stored samples; `None` stores every step.
    pub output_every: Option<f64>,
}

impl Schedule {
    pub fn new(t_end: f64, dt: TimeStep, output_every: Option<f64>) -> Result<Self> {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::invalid("t_end", format!("must be positive and finite, got {t_end}")));
        }
        if let TimeStep::Fixed(v) = dt {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid("dt", format!("must be positive, got {v}")));
            }
        }
        if let Some(every) = output_every {
            if !(every > 0.0) || !every.is_finite() {
                return Err(Error::invalid("output_every", format!("must be positive, got {every}")));
            }
        }
        Ok(Self { t_end, dt, output_every })
    }
}

/// How a flat state vector maps onto the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layout {
    /// `n` components on `nodes` grid points, component-major.
    Field { n: usize, nodes: usize },
    /// `m` compartments of `n` species, compartment-major.
    Compartments { m: usize, n: usize },
    Lumped { n: usize },
}

impl Layout {
    pub fn len(&self) -> usize {
        match *self {
            Layout::Field { n, nodes } => n * nodes,
            Layout::Compartments { m, n } => m * n,
            Layout::Lumped { n } => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegratorMeta {
    pub method: &'static str,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
}

/// Stored samples of a simulation, strictly increasing in time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    layout: Layout,
    meta: IntegratorMeta,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<Vec<f64>>, layout: Layout, meta: IntegratorMeta) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::DimensionMismatch {
                what: "trajectory samples",
                expected: times.len(),
                got: states.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("times", "time stamps must be strictly increasing"));
        }
        if let Some(bad) = states.iter().find(|s| s.len() != layout.len()) {
            return Err(Error::DimensionMismatch {
                what: "trajectory state",
                expected: layout.len(),
                got: bad.len(),
            });
        }
        Ok(Self { times, states, layout, meta })
    }

    /// Wraps externally produced samples (e.g. a synthetic signal).
    pub fn from_samples(times: Vec<f64>, states: Vec<Vec<f64>>, layout: Layout) -> Result<Self> {
        let meta = IntegratorMeta {
            method: "external",
            steps: times.len().saturating_sub(1),
            dt_min: f64::NAN,
            dt_max: f64::NAN,
        };
        Self::new(times, states, layout, meta)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k]
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("trajectories hold the initial state")
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn meta(&self) -> &IntegratorMeta {
        &self.meta
    }

    /// Same samples with every state transformed, e.g. shifted by an equilibrium.
    pub fn map_states(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Trajectory> {
        let states = self.states.iter().map(|s| f(s)).collect();
        Trajectory::new(self.times.clone(), states, self.layout, self.meta.clone())
    }

    /// Time series of one flat state coordinate.
    pub fn coordinate(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[index]).collect()
    }
}

/// Classical fourth-order Runge-Kutta with outputs landing exactly on the
/// cadence. `step_for` supplies the nominal step at the current state.
pub(crate) fn integrate_rk4<F, D>(
    x0: Vec<f64>,
    schedule: &Schedule,
    layout: Layout,
    mut rhs: F,
    mut step_for: D,
) -> Result<Trajectory>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
    D: FnMut(&[f64]) -> Result<f64>,
{
    let dim = x0.len();
    let t_end = schedule.t_end;
    let mut x = x0;
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut states = vec![x.clone()];
    let mut meta = IntegratorMeta {
        method: "rk4",
        steps: 0,
        dt_min: f64::INFINITY,
        dt_max: 0.0,
    };

    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];

    let mut out_index = 1usize;
    let next_output = |k: usize| match schedule.output_every {
        Some(every) => (every * k as f64).min(t_end),
        None => t_end,
    };
    let mut target = next_output(out_index);

    while t < t_end {
        let nominal = step_for(&x)?;
        if !(nominal >= MIN_STEP) {
            return Err(Error::StepUnderflow { dt: nominal, t });
        }
        let landing = t + nominal >= target - 1e-9 * nominal;
        let h = if landing { target - t } else { nominal };

        rhs(&x, &mut k1)?;
        for i in 0..dim {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        rhs(&tmp, &mut k2)?;
        for i in 0..dim {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        rhs(&tmp, &mut k3)?;
        for i in 0..dim {
            tmp[i] = x[i] + h * k3[i];
        }
        rhs(&tmp, &mut k4)?;
        for i in 0..dim {
            tmp[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if tmp.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { last_valid_time: t });
        }
        std::mem::swap(&mut x, &mut tmp);
        meta.steps += 1;
        meta.dt_min = meta.dt_min.min(h);
        meta.dt_max = meta.dt_max.max(h);

        if landing {
            t = target;
            let store = schedule.output_every.is_some() || t >= t_end;
            if store {
                times.push(t);
                states.push(x.clone());
            }
            out_index += 1;
            target = next_output(out_index);
        } else {
            t += h;
            if schedule.output_every.is_none() {
                times.push(t);
                states.push(x.clone());
            }
        }
    }
    Trajectory::new(times, states, layout, meta)
}
