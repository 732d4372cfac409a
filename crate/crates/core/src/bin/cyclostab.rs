use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cyclostab::scenario::{self, RunOutput, ScenarioConfig, ScenarioKind};
use cyclostab::Error;

#[derive(Parser)]
#[command(name = "cyclostab", version, about = "Stability analysis and simulation of cyclic feedback systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze the systems described by `analyze` scenario files.
    Analyze(RunArgs),
    /// Simulate the systems described by simulation scenario files.
    Simulate(RunArgs),
    /// Run a builtin scenario by name (`list` shows the available names).
    Scenario {
        name: String,
        #[command(flatten)]
        args: RunArgs,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario file (repeat for a sweep).
    #[arg(long = "config")]
    configs: Vec<PathBuf>,
    /// Directory receiving `<name>.json` and `<name>.csv`; reports go to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of scenarios run in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(if err.is_config_error() { EXIT_CONFIG } else { EXIT_NUMERIC })
}

fn load(args: &RunArgs, accept: impl Fn(ScenarioKind) -> bool, verb: &str) -> Result<Vec<ScenarioConfig>, Error> {
    if args.configs.is_empty() {
        return Err(Error::Config(format!("`{verb}` needs at least one --config file")));
    }
    args.configs
        .iter()
        .map(|path| {
            let mut cfg = ScenarioConfig::from_path(path)?;
            if !accept(cfg.kind) {
                return Err(Error::Config(format!("{}: kind {:?} cannot be run by `{verb}`", path.display(), cfg.kind)));
            }
            if cfg.name.is_none() {
                let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
                cfg.name = stem;
            }
            Ok(cfg)
        })
        .collect()
}

fn emit(outputs: Vec<Result<RunOutput, Error>>, out: Option<&PathBuf>) -> ExitCode {
    let mut code = ExitCode::SUCCESS;
    for result in outputs {
        let run = match result {
            Ok(run) => run,
            Err(err) => {
                code = fail(&err);
                continue;
            }
        };
        match out {
            Some(dir) => match run.write_to(dir) {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                }
                Err(err) => code = fail(&err),
            },
            None => match serde_json::to_string_pretty(&run.report) {
                Ok(text) => println!("{text}"),
                Err(err) => code = fail(&err.into()),
            },
        }
    }
    code
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (configs, args) = match &cli.command {
        Command::Analyze(args) => (load(args, |k| k == ScenarioKind::Analyze, "analyze"), args),
        Command::Simulate(args) => (load(args, |k| k != ScenarioKind::Analyze, "simulate"), args),
        Command::Scenario { name, args } if name == "list" => {
            for info in scenario::list_scenarios() {
                println!("{:<16} {}", info.name, info.description);
            }
            return ExitCode::SUCCESS;
        }
        Command::Scenario { name, args } => {
            let cfgs = if args.configs.is_empty() {
                scenario::builtin(name).map(|c| vec![c])
            } else {
                Err(Error::Config("`scenario` runs builtins; use `simulate --config` for files".into()))
            };
            (cfgs, args)
        }
    };
    let configs = match configs {
        Ok(c) => c,
        Err(err) => return fail(&err),
    };
    emit(scenario::run_many(&configs, args.jobs), args.out.as_ref())
}
