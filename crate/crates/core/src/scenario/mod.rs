//! Scenario files, builtin scenarios and their execution.

mod config;

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

pub use config::{
    AnalysisConfig, CompartmentConfig, Coordinates, Equilibrium, EquilibriumSpec, FnConfig, GainSpec, GridConfig,
    InitialConfig, IntegratorConfig, LyapunovConfig, OscillationConfig, OutputConfig, ProfileTerm, ScenarioConfig,
    ScenarioKind, SystemConfig,
};

use crate::error::{Error, Result};
use crate::lyapunov::{monitor_decrease, LyapunovWeights};
use crate::model::{check_conditions_on, CompartmentalSystem, ConditionOptions, GainVector, Interval, NonlinearCyclicSystem};
use crate::ode::{detect_oscillation, simulate_ode, write_ode_csv};
use crate::pde::{equilibrium_solve, field_at, field_norm, simulate_pde, write_pde_csv, Field, Norm, SpatialGrid};
use crate::secant::{diagonal_scaling, diagonal_scaling_for_system, hurwitz, secant_satisfied, verify_modal_series};
use crate::trajectory::{Schedule, Trajectory};

struct Builtin {
    name: &'static str,
    source: &'static str,
}

const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "counterexample",
        source: include_str!("../../scenarios/counterexample.toml"),
    },
    Builtin {
        name: "two-compartment",
        source: include_str!("../../scenarios/two-compartment.toml"),
    },
    Builtin {
        name: "mapk-pde",
        source: include_str!("../../scenarios/mapk-pde.toml"),
    },
    Builtin {
        name: "linear-rd",
        source: include_str!("../../scenarios/linear-rd.toml"),
    },
    Builtin {
        name: "linear-analysis",
        source: include_str!("../../scenarios/linear-analysis.toml"),
    },
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: String,
}

/// Names and one-line descriptions of the builtin scenarios.
pub fn list_scenarios() -> Vec<ScenarioInfo> {
    BUILTINS
        .iter()
        .map(|b| ScenarioInfo {
            name: b.name,
            description: builtin(b.name)
                .ok()
                .and_then(|c| c.description)
                .unwrap_or_default(),
        })
        .collect()
}

pub fn builtin(name: &str) -> Result<ScenarioConfig> {
    let b = BUILTINS.iter().find(|b| b.name == name).ok_or_else(|| {
        let names: Vec<&str> = BUILTINS.iter().map(|b| b.name).collect();
        Error::Config(format!("unknown scenario `{name}` (available: {})", names.join(", ")))
    })?;
    let mut cfg = ScenarioConfig::from_toml(b.source)?;
    cfg.name.get_or_insert_with(|| b.name.to_string());
    Ok(cfg)
}

/// Result of one scenario run, held in memory until written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub name: String,
    pub report: Value,
    pub csv: Option<String>,
    pub trajectory: Option<Trajectory>,
}

impl RunOutput {
    /// Writes `<name>.json` and `<name>.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        let json_path = dir.join(format!("{}.json", self.name));
        std::fs::write(&json_path, serde_json::to_string_pretty(&self.report)? + "\n")?;
        files.push(json_path);
        if let Some(csv) = &self.csv {
            let csv_path = dir.join(format!("{}.csv", self.name));
            std::fs::write(&csv_path, csv)?;
            files.push(csv_path);
        }
        Ok(files)
    }
}

fn resolve_equilibrium(sys: &SystemConfig) -> Result<(Vec<f64>, Value)> {
    match &sys.equilibrium {
        Equilibrium::Known(x) => {
            let residual = sys
                .system
                .reaction(x)?
                .iter()
                .fold(0.0_f64, |m, v| m.max(v.abs()));
            Ok((x.clone(), json!({ "x": x, "residual": residual, "source": "given" })))
        }
        Equilibrium::Solve { guess } => {
            let eq = equilibrium_solve(&sys.system, guess)?;
            let value = json!({
                "x": eq.x,
                "residual": eq.residual,
                "iterations": eq.iterations,
                "jacobian": eq.jacobian,
                "source": "newton",
            });
            Ok((eq.x, value))
        }
    }
}

fn resolve_gains(cfg: &ScenarioConfig, shifted: &NonlinearCyclicSystem, spec: &GainSpec) -> Result<GainVector> {
    match spec {
        GainSpec::Values(v) => GainVector::new(v.clone()),
        GainSpec::Keyword(k) if k == "mapk" => cfg
            .system
            .mapk
            .as_ref()
            .ok_or_else(|| Error::Config("lyapunov.gains = \"mapk\" needs system type mapk".into()))?
            .gains(),
        GainSpec::Keyword(k) if k == "certified" => {
            let [lo, hi] = cfg
                .analysis
                .interval
                .ok_or_else(|| Error::Config("lyapunov.gains = \"certified\" needs analysis.interval".into()))?;
            let opts = ConditionOptions {
                samples: cfg.analysis.samples,
                ..ConditionOptions::default()
            };
            let report = check_conditions_on(shifted, &[Interval::new(lo, hi)?], opts)?;
            let gains = report
                .certified_gains()
                .ok_or_else(|| Error::Config("sector gains could not be certified on analysis.interval".into()))?;
            GainVector::new(gains)
        }
        GainSpec::Keyword(k) => Err(Error::Config(format!(
            "lyapunov.gains must be a vector, \"mapk\" or \"certified\", got \"{k}\""
        ))),
    }
}

fn schedule(cfg: &ScenarioConfig) -> Result<Schedule> {
    let i = cfg
        .integrator
        .ok_or_else(|| Error::Config("missing [integrator] table".into()))?;
    Schedule::new(i.t_end, i.dt, i.output_every)
}

fn scenario_name(cfg: &ScenarioConfig) -> String {
    cfg.name.clone().unwrap_or_else(|| "scenario".to_string())
}

/// Executes one scenario; deterministic for a given configuration.
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput> {
    match cfg.kind {
        ScenarioKind::Analyze => run_analyze(cfg),
        ScenarioKind::SimulatePde => run_pde(cfg),
        ScenarioKind::SimulateOde | ScenarioKind::SimulateCompartmental => run_ode(cfg),
    }
}

/// Runs independent scenarios on up to `jobs` threads, preserving order.
pub fn run_many(cfgs: &[ScenarioConfig], jobs: usize) -> Vec<Result<RunOutput>> {
    let jobs = jobs.max(1).min(cfgs.len().max(1));
    let mut results: Vec<Option<Result<RunOutput>>> = (0..cfgs.len()).map(|_| None).collect();
    let chunk = cfgs.len().div_ceil(jobs).max(1);
    std::thread::scope(|scope| {
        for (cfg_chunk, out_chunk) in cfgs.chunks(chunk).zip(results.chunks_mut(chunk)) {
            scope.spawn(move || {
                for (cfg, slot) in cfg_chunk.iter().zip(out_chunk) {
                    *slot = Some(run(cfg));
                }
            });
        }
    });
    results.into_iter().map(|r| r.expect("every slot is filled")).collect()
}

fn run_analyze(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let name = scenario_name(cfg);
    let mut report = if let Some(lin) = &cfg.system.linear {
        let modal = verify_modal_series(lin, cfg.analysis.k_max)?;
        let mut value = serde_json::to_value(&modal)?;
        value["scaling"] = serde_json::to_value(diagonal_scaling_for_system(lin)?)?;
        value
    } else {
        analyze_nonlinear(cfg)?
    };
    report["scenario"] = json!(name);
    Ok(RunOutput {
        name,
        report,
        csv: None,
        trajectory: None,
    })
}

fn analyze_nonlinear(cfg: &ScenarioConfig) -> Result<Value> {
    let sys = &cfg.system.system;
    let (eq, eq_report) = resolve_equilibrium(&cfg.system)?;
    let jac = sys.jacobian(&eq)?;
    let hw = hurwitz(&jac)?;
    let mut slopes = Vec::with_capacity(sys.n());
    for i in 0..sys.n() {
        let fp = sys.f()[i].derivative(eq[i])?;
        let gp = sys.g()[i].derivative(eq[i])?;
        slopes.push(if fp > 0.0 && gp > 0.0 { Some(gp / fp) } else { None });
    }
    let linear_gains: Option<Vec<f64>> = slopes.iter().copied().collect();
    let linearization = match &linear_gains {
        Some(g) => {
            let gv = GainVector::new(g.clone())?;
            json!({ "gains": g, "secant": secant_satisfied(&gv) })
        }
        None => json!({ "gains": Value::Null, "secant": Value::Null }),
    };
    let mut report = json!({
        "equilibrium": eq_report,
        "jacobian": jac,
        "hurwitz": hw.is_hurwitz,
        "spectral_abscissa": hw.spectral_abscissa,
        "eigenvalues": hw.eigenvalues,
        "linearization": linearization,
    });
    let shifted = sys.shifted(&eq)?;
    if let Some([lo, hi]) = cfg.analysis.interval {
        let opts = ConditionOptions {
            samples: cfg.analysis.samples,
            ..ConditionOptions::default()
        };
        report["conditions"] = serde_json::to_value(check_conditions_on(&shifted, &[Interval::new(lo, hi)?], opts)?)?;
    }
    if let Some(ly) = &cfg.lyapunov {
        let gains = resolve_gains(cfg, &shifted, &ly.gains)?;
        let check = secant_satisfied(&gains);
        let scaling = diagonal_scaling(&gains)?;
        report["gains"] = json!(gains);
        report["product"] = json!(check.product);
        report["threshold"] = serde_json::to_value(check)?["threshold"].clone();
        report["holds"] = json!(check.holds);
        report["lambda_min"] = json!(scaling.lambda_min);
        report["scaling"] = serde_json::to_value(scaling)?;
    }
    Ok(report)
}

fn initial_field(cfg: &ScenarioConfig, grid: &SpatialGrid, eq: &[f64]) -> Result<Field> {
    let init = cfg
        .initial
        .as_ref()
        .ok_or_else(|| Error::Config("missing [initial] table".into()))?;
    let comps = init
        .components
        .as_ref()
        .ok_or_else(|| Error::Config("initial.components is required for PDE scenarios".into()))?;
    let field = Field::from_fn(comps.len(), grid, |i, xi| comps[i].iter().map(|t| t.eval(xi)).sum());
    match init.coordinates {
        Coordinates::Original => field.offset(&eq.iter().map(|v| -v).collect::<Vec<_>>()),
        Coordinates::Deviation => Ok(field),
    }
}

fn run_pde(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let name = scenario_name(cfg);
    let grid = SpatialGrid::new(cfg.grid.nodes)?;
    let (eq, eq_report) = resolve_equilibrium(&cfg.system)?;
    let shifted = cfg.system.system.shifted(&eq)?;
    let psi0 = initial_field(cfg, &grid, &eq)?;
    let traj = simulate_pde(&shifted, &grid, &psi0, &schedule(cfg)?)?;
    let last = field_at(&traj, traj.len() - 1, &grid)?;

    let mut report = json!({
        "scenario": name,
        "equilibrium": eq_report,
        "grid": { "nodes": grid.nodes(), "spacing": grid.spacing() },
        "integrator": traj.meta(),
        "t_end": traj.times().last(),
        "samples": traj.len(),
        "initial_l2": field_norm(&psi0, &grid, Norm::L2),
        "final_l2": field_norm(&last, &grid, Norm::L2),
        "final_max_abs": last.max_abs_per_component(),
    });
    if let Some(lin) = &cfg.system.linear {
        report["modal"] = serde_json::to_value(verify_modal_series(lin, cfg.analysis.k_max)?)?;
    }
    if let Some(ly) = &cfg.lyapunov {
        let gains = resolve_gains(cfg, &shifted, &ly.gains)?;
        let weights = LyapunovWeights::new(gains)?;
        let mon = monitor_decrease(&traj, Some(&grid), &weights, shifted.g(), &ly.monitor)?;
        report["lyapunov"] = serde_json::to_value(mon)?;
    }
    let csv = if cfg.output.csv {
        let mut buf = Vec::new();
        write_pde_csv(&traj, &grid, &mut buf)?;
        Some(String::from_utf8(buf).expect("CSV is ASCII"))
    } else {
        None
    };
    Ok(RunOutput {
        name,
        report,
        csv,
        trajectory: Some(traj),
    })
}

fn run_ode(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let name = scenario_name(cfg);
    let base = cfg.system.system.clone().without_diffusion();
    let (eq, eq_report) = resolve_equilibrium(&cfg.system)?;
    let init = cfg
        .initial
        .as_ref()
        .ok_or_else(|| Error::Config("missing [initial] table".into()))?;
    let x0_raw = init
        .state
        .clone()
        .ok_or_else(|| Error::Config("initial.state is required for ODE scenarios".into()))?;
    let n = base.n();
    let x0: Vec<f64> = match init.coordinates {
        Coordinates::Original => x0_raw,
        Coordinates::Deviation => x0_raw.iter().enumerate().map(|(k, v)| v + eq[k % n]).collect(),
    };
    let sched = schedule(cfg)?;
    let traj = match cfg.kind {
        ScenarioKind::SimulateCompartmental => {
            let c = cfg
                .compartments
                .as_ref()
                .ok_or_else(|| Error::Config("missing [compartments] table".into()))?;
            let cm = if c.flux.len() == n {
                CompartmentalSystem::uniform(c.count, base.clone(), c.flux.clone())?
            } else {
                let rows = c.flux.chunks(n).map(<[_]>::to_vec).collect();
                CompartmentalSystem::new(c.count, base.clone(), rows)?
            };
            simulate_ode(&cm, &x0, &sched)?
        }
        _ => simulate_ode(&base, &x0, &sched)?,
    };
    let last = traj.last_state();
    let distance = last
        .iter()
        .enumerate()
        .fold(0.0_f64, |m, (k, v)| m.max((v - eq[k % n]).abs()));
    let mut report = json!({
        "scenario": name,
        "equilibrium": eq_report,
        "integrator": traj.meta(),
        "t_end": traj.times().last(),
        "samples": traj.len(),
        "final_state": last,
        "final_distance_to_equilibrium": distance,
    });
    if let Some(osc) = &cfg.oscillation {
        let opts = osc.options();
        let mut entries = Vec::new();
        for &c in &osc.coordinates {
            let r = detect_oscillation(&traj, c - 1, &opts)?;
            entries.push(json!({ "coordinate": c, "report": r, "half_range": r.half_range() }));
        }
        report["oscillation"] = Value::Array(entries);
    }
    if let Some(ly) = &cfg.lyapunov {
        let shifted = base.shifted(&eq)?;
        let gains = resolve_gains(cfg, &shifted, &ly.gains)?;
        let weights = LyapunovWeights::new(gains)?;
        let deviation = traj.map_states(|s| s.iter().enumerate().map(|(k, v)| v - eq[k % n]).collect())?;
        let mon = monitor_decrease(&deviation, None, &weights, shifted.g(), &ly.monitor)?;
        report["lyapunov"] = serde_json::to_value(mon)?;
    }
    let csv = if cfg.output.csv {
        let mut buf = Vec::new();
        write_ode_csv(&traj, &mut buf)?;
        Some(String::from_utf8(buf).expect("CSV is ASCII"))
    } else {
        None
    };
    Ok(RunOutput {
        name,
        report,
        csv,
        trajectory: Some(traj),
    })
}
