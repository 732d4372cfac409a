//! Declarative scenario files (TOML).
//!
//! Parsing goes through `TryFrom` wrappers; semantic errors surface
//! with the line and column of the offending table.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::lyapunov::MonitorOptions;
use crate::model::{presets, GainVector, LinearCyclicSystem, MapkParams, NonlinearCyclicSystem, ScalarFn};
use crate::ode::OscillationOptions;
use crate::trajectory::TimeStep;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Analyze,
    SimulatePde,
    SimulateOde,
    SimulateCompartmental,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    pub system: SystemConfig,
    #[serde(default)]
    pub compartments: Option<CompartmentConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default)]
    pub initial: Option<InitialConfig>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub lyapunov: Option<LyapunovConfig>,
    #[serde(default)]
    pub oscillation: Option<OscillationConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Cross-section checks that a single table cannot express.
    fn validate(&self) -> Result<()> {
        let n = self.system.system.n();
        let need = |what: &str| Error::Config(format!("kind {:?} requires a [{what}] table", self.kind));
        match self.kind {
            ScenarioKind::Analyze => {}
            ScenarioKind::SimulatePde => {
                if self.system.system.h().is_none() {
                    return Err(Error::Config("simulate-pde needs diffusion functions (system.h or system.c)".into()));
                }
                let init = self.initial.as_ref().ok_or_else(|| need("initial"))?;
                if init.components.as_ref().map(Vec::len) != Some(n) {
                    return Err(Error::Config(format!("initial.components must list {n} component profiles")));
                }
                self.integrator.as_ref().ok_or_else(|| need("integrator"))?;
            }
            ScenarioKind::SimulateOde | ScenarioKind::SimulateCompartmental => {
                let m = match self.kind {
                    ScenarioKind::SimulateCompartmental => {
                        let c = self.compartments.as_ref().ok_or_else(|| need("compartments"))?;
                        let per = c.flux.len();
                        if per != n && per != (c.count - 1) * n {
                            return Err(Error::Config(format!(
                                "compartments.flux must hold {n} shared entries or {} per-interface entries, got {per}",
                                (c.count - 1) * n
                            )));
                        }
                        c.count
                    }
                    _ => 1,
                };
                let init = self.initial.as_ref().ok_or_else(|| need("initial"))?;
                match &init.state {
                    Some(s) if s.len() == m * n => {}
                    Some(s) => {
                        return Err(Error::Config(format!(
                            "initial.state must have {} entries, got {}",
                            m * n,
                            s.len()
                        )))
                    }
                    None => return Err(Error::Config("initial.state is required for ODE scenarios".into())),
                }
                self.integrator.as_ref().ok_or_else(|| need("integrator"))?;
            }
        }
        if let Some(osc) = &self.oscillation {
            let dim = match (&self.kind, &self.compartments) {
                (ScenarioKind::SimulateCompartmental, Some(c)) => c.count * n,
                _ => n,
            };
            if let Some(bad) = osc.coordinates.iter().find(|&&c| c == 0 || c > dim) {
                return Err(Error::Config(format!("oscillation coordinate {bad} outside 1..={dim}")));
            }
        }
        if let Some(ly) = &self.lyapunov {
            if let GainSpec::Values(v) = &ly.gains {
                if v.len() != n {
                    return Err(Error::Config(format!("lyapunov.gains must have {n} entries")));
                }
            }
        }
        Ok(())
    }
}

/// One catalog nonlinearity, optionally scaled and translated.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FnEntry {
    kind: String,
    slope: Option<f64>,
    vmax: Option<f64>,
    km: Option<f64>,
    mu: Option<f64>,
    k: Option<f64>,
    n: Option<u32>,
    alpha: Option<f64>,
    beta: Option<f64>,
    gain: Option<f64>,
    center: Option<f64>,
    value: Option<f64>,
    xs: Option<Vec<f64>>,
    ys: Option<Vec<f64>>,
    /// Multiplies the function.
    scale: Option<f64>,
    /// Evaluates the function at `s + offset`.
    offset: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "FnEntry")]
pub struct FnConfig(pub ScalarFn);

impl TryFrom<FnEntry> for FnConfig {
    type Error = String;

    fn try_from(e: FnEntry) -> std::result::Result<Self, String> {
        let mut used = vec!["kind", "scale", "offset"];
        let mut take = |name: &'static str, v: Option<f64>| -> std::result::Result<f64, String> {
            used.push(name);
            v.ok_or_else(|| format!("`{}` needs parameter `{name}`", e.kind))
        };
        let f = match e.kind.as_str() {
            "linear" => ScalarFn::linear(take("slope", e.slope)?),
            "michaelis_menten" => ScalarFn::michaelis_menten(take("vmax", e.vmax)?, take("km", e.km)?),
            "inhibitory_hill" => {
                let (mu, k) = (take("mu", e.mu)?, take("k", e.k)?);
                used.push("n");
                ScalarFn::inhibitory_hill(mu, k, e.n.unwrap_or(1))
            }
            "exp_sat" => ScalarFn::exp_sat(
                take("alpha", e.alpha)?,
                take("beta", e.beta)?,
                take("gain", e.gain)?,
                take("center", e.center)?,
            ),
            "constant" => ScalarFn::constant(take("value", e.value)?),
            "tabulated" => {
                used.extend(["xs", "ys"]);
                let xs = e.xs.clone().ok_or("`tabulated` needs `xs`")?;
                let ys = e.ys.clone().ok_or("`tabulated` needs `ys`")?;
                ScalarFn::tabulated(xs, ys)
            }
            other => {
                return Err(format!(
                    "unknown function kind `{other}` (expected linear, michaelis_menten, \
                     inhibitory_hill, exp_sat, constant or tabulated)"
                ))
            }
        }
        .map_err(|err| err.to_string())?;
        let present = [
            ("slope", e.slope.is_some()),
            ("vmax", e.vmax.is_some()),
            ("km", e.km.is_some()),
            ("mu", e.mu.is_some()),
            ("k", e.k.is_some()),
            ("n", e.n.is_some()),
            ("alpha", e.alpha.is_some()),
            ("beta", e.beta.is_some()),
            ("gain", e.gain.is_some()),
            ("center", e.center.is_some()),
            ("value", e.value.is_some()),
            ("xs", e.xs.is_some()),
            ("ys", e.ys.is_some()),
        ];
        if let Some((name, _)) = present.iter().find(|(name, p)| *p && !used.contains(name)) {
            return Err(format!("parameter `{name}` does not apply to `{}`", e.kind));
        }
        let mut f = f.translated(e.offset.unwrap_or(0.0));
        if let Some(s) = e.scale {
            if !s.is_finite() {
                return Err("scale must be finite".into());
            }
            f = f.scaled(s);
        }
        Ok(FnConfig(f))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum EquilibriumSpec {
    Values(Vec<f64>),
    Keyword(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    #[serde(rename = "type")]
    kind: String,
    a: Option<Vec<f64>>,
    b: Option<Vec<f64>>,
    c: Option<Vec<f64>>,
    f: Option<Vec<FnConfig>>,
    g: Option<Vec<FnConfig>>,
    h: Option<Vec<FnConfig>>,
    params: Option<MapkParams>,
    equilibrium: Option<EquilibriumSpec>,
    initial_guess: Option<Vec<f64>>,
}

/// Where the equilibrium of the simulated system comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Equilibrium {
    Known(Vec<f64>),
    Solve { guess: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "RawSystem")]
pub struct SystemConfig {
    pub system: NonlinearCyclicSystem,
    /// Present for `type = "linear"`.
    pub linear: Option<LinearCyclicSystem>,
    /// Present for `type = "mapk"`.
    pub mapk: Option<MapkParams>,
    pub equilibrium: Equilibrium,
}

impl TryFrom<RawSystem> for SystemConfig {
    type Error = String;

    fn try_from(r: RawSystem) -> std::result::Result<Self, String> {
        let err = |e: Error| e.to_string();
        let reject = |names: &[(&str, bool)], kind: &str| -> std::result::Result<(), String> {
            match names.iter().find(|(_, p)| *p) {
                Some((name, _)) => Err(format!("`{name}` does not apply to system type `{kind}`")),
                None => Ok(()),
            }
        };
        let fns = |v: Option<Vec<FnConfig>>| v.map(|v| v.into_iter().map(|f| f.0).collect::<Vec<_>>());
        let (system, linear, mapk, default_eq) = match r.kind.as_str() {
            "linear" => {
                reject(&[("f", r.f.is_some()), ("g", r.g.is_some()), ("h", r.h.is_some()), ("params", r.params.is_some())], "linear")?;
                let a = r.a.clone().ok_or("linear system needs `a`")?;
                let n = a.len();
                let b = r.b.clone().ok_or("linear system needs `b`")?;
                let c = r.c.clone().unwrap_or_else(|| vec![1.0; n]);
                let lin = LinearCyclicSystem::new(a, b, c).map_err(err)?;
                (lin.to_nonlinear(), Some(lin), None, Equilibrium::Known(vec![0.0; n]))
            }
            "mapk" => {
                reject(&[("a", r.a.is_some()), ("b", r.b.is_some()), ("c", r.c.is_some()), ("f", r.f.is_some()), ("g", r.g.is_some()), ("h", r.h.is_some())], "mapk")?;
                let p = r.params.clone().unwrap_or_default();
                let sys = p.system().map_err(err)?;
                (sys, None, Some(p), Equilibrium::Solve { guess: vec![0.5; 3] })
            }
            "counterexample" => {
                reject(&[("a", r.a.is_some()), ("b", r.b.is_some()), ("f", r.f.is_some()), ("g", r.g.is_some()), ("params", r.params.is_some())], "counterexample")?;
                let mut sys = presets::counterexample();
                if let Some(h) = fns(r.h.clone()) {
                    sys = sys.with_diffusion(h).map_err(err)?;
                } else if let Some(c) = r.c.clone() {
                    let h = c.iter().map(|&v| ScalarFn::constant(v)).collect::<Result<Vec<_>>>().map_err(err)?;
                    sys = sys.with_diffusion(h).map_err(err)?;
                }
                (sys, None, None, Equilibrium::Known(presets::COUNTEREXAMPLE_EQUILIBRIUM.to_vec()))
            }
            "custom" => {
                reject(&[("a", r.a.is_some()), ("b", r.b.is_some()), ("params", r.params.is_some())], "custom")?;
                let f = fns(r.f.clone()).ok_or("custom system needs `f`")?;
                let g = fns(r.g.clone()).ok_or("custom system needs `g`")?;
                let n = f.len();
                let h = match (fns(r.h.clone()), r.c.clone()) {
                    (Some(_), Some(_)) => return Err("give either `h` or `c`, not both".into()),
                    (Some(h), None) => Some(h),
                    (None, Some(c)) => Some(c.iter().map(|&v| ScalarFn::constant(v)).collect::<Result<Vec<_>>>().map_err(err)?),
                    (None, None) => None,
                };
                let sys = NonlinearCyclicSystem::new(f, g, h).map_err(err)?;
                (sys, None, None, Equilibrium::Solve { guess: vec![0.5; n] })
            }
            other => return Err(format!("unknown system type `{other}` (expected linear, mapk, counterexample or custom)")),
        };
        let n = system.n();
        let equilibrium = match (r.equilibrium, r.initial_guess) {
            (Some(EquilibriumSpec::Values(v)), None) => Equilibrium::Known(v),
            (Some(EquilibriumSpec::Values(_)), Some(_)) => {
                return Err("`initial_guess` only applies when equilibrium = \"solve\"".into())
            }
            (Some(EquilibriumSpec::Keyword(k)), guess) if k == "solve" => Equilibrium::Solve {
                guess: guess.unwrap_or_else(|| vec![0.5; n]),
            },
            (Some(EquilibriumSpec::Keyword(k)), _) => {
                return Err(format!("equilibrium must be \"solve\" or a vector, got \"{k}\""))
            }
            (None, Some(guess)) => Equilibrium::Solve { guess },
            (None, None) => default_eq,
        };
        match &equilibrium {
            Equilibrium::Known(v) | Equilibrium::Solve { guess: v } if v.len() != n => {
                return Err(format!("equilibrium / initial_guess must have {n} entries, got {}", v.len()))
            }
            _ => {}
        }
        Ok(SystemConfig {
            system,
            linear,
            mapk,
            equilibrium,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCompartments {
    count: usize,
    flux: Vec<FnConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "RawCompartments")]
pub struct CompartmentConfig {
    pub count: usize,
    pub flux: Vec<ScalarFn>,
}

impl TryFrom<RawCompartments> for CompartmentConfig {
    type Error = String;

    fn try_from(r: RawCompartments) -> std::result::Result<Self, String> {
        if r.count < 1 {
            return Err("compartments.count must be at least 1".into());
        }
        Ok(Self {
            count: r.count,
            flux: r.flux.into_iter().map(|f| f.0).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub nodes: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { nodes: 101 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub t_end: f64,
    #[serde(default)]
    pub dt: TimeStep,
    pub output_every: Option<f64>,
}

/// One term of a closed-form initial profile in ξ.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileTerm {
    /// Coefficients of 1, ξ, ξ², …
    Poly(Vec<f64>),
    Cos { k: f64, amplitude: f64 },
    Sin { k: f64, amplitude: f64 },
    Constant(f64),
}

impl ProfileTerm {
    pub fn eval(&self, xi: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            ProfileTerm::Poly(c) => c.iter().rev().fold(0.0, |acc, a| acc * xi + a),
            ProfileTerm::Cos { k, amplitude } => amplitude * (k * PI * xi).cos(),
            ProfileTerm::Sin { k, amplitude } => amplitude * (k * PI * xi).sin(),
            ProfileTerm::Constant(v) => *v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Coordinates {
    /// Values of the original state; the equilibrium is subtracted.
    #[default]
    Original,
    /// Values of the deviation from equilibrium.
    Deviation,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default)]
    pub coordinates: Coordinates,
    /// Field profile per component, each a sum of terms.
    pub components: Option<Vec<Vec<ProfileTerm>>>,
    /// Flat state for ODE scenarios.
    pub state: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub k_max: usize,
    /// Deviation interval on which conditions are sampled (nonlinear systems).
    pub interval: Option<[f64; 2]>,
    pub samples: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            k_max: 20,
            interval: None,
            samples: 201,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GainSpec {
    Values(Vec<f64>),
    Keyword(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovConfig {
    /// Explicit gains, `"mapk"` for the closed form, or `"certified"` for the
    /// sampled suprema from the condition check.
    pub gains: GainSpec,
    #[serde(default)]
    pub monitor: MonitorOptions,
}

impl LyapunovConfig {
    pub fn explicit_gains(&self) -> Option<Result<GainVector>> {
        match &self.gains {
            GainSpec::Values(v) => Some(GainVector::new(v.clone())),
            GainSpec::Keyword(_) => None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillationConfig {
    /// One-based flat coordinates to analyze.
    pub coordinates: Vec<usize>,
    pub window: Option<f64>,
    pub min_peaks: Option<usize>,
    pub trend_band: Option<f64>,
    pub noise_floor: Option<f64>,
    pub min_samples: Option<usize>,
}

impl OscillationConfig {
    pub fn options(&self) -> OscillationOptions {
        let d = OscillationOptions::default();
        OscillationOptions {
            window: self.window.unwrap_or(d.window),
            min_peaks: self.min_peaks.unwrap_or(d.min_peaks),
            trend_band: self.trend_band.unwrap_or(d.trend_band),
            noise_floor: self.noise_floor.unwrap_or(d.noise_floor),
            min_samples: self.min_samples.unwrap_or(d.min_samples),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub csv: bool,
    pub report: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { csv: true, report: true }
    }
}
