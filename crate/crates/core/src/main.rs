//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error,
//! 3 planner non-convergence, 4 runtime divergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flatfloor::harness::{
    emit_outputs, metrics_from_log, output, plan_scenario, scenario_waypoints, track_reference,
    waypoints_csv, write_plots, write_trajectories, RunLog, RunOutcome, ScenarioConfig,
};
use flatfloor::planner::Trajectory;
use flatfloor::tracker::Reference;
use flatfloor::Error;

#[derive(Parser)]
#[command(
    name = "flatfloor",
    version,
    about = "Plan, track and simulate a free-floating platform"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Scenario TOML; built-in defaults when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set noise.seed=3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Plan every segment of the scenario and write one CSV per segment.
    Plan {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Output directory (default: sim.output_dir).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run the closed loop along previously planned segment files.
    Track {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Directory holding `segment_*.csv`.
        #[arg(short, long)]
        trajectories: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Plan and run the scenario end to end.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Recompute metrics from a run log and print them as JSON.
    Metrics {
        #[arg(short, long)]
        log: PathBuf,
        /// Also write the JSON to this file.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Render the plots of a run log.
    Plot {
        #[arg(short, long)]
        log: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check a config and print it with all defaults filled in.
    Validate {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    error: Error,
}

fn code_of(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 1,
        Error::PlannerNonConvergence { .. } => 3,
        Error::Divergence { .. } => 4,
        _ => 2,
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure {
            code: code_of(&error),
            error,
        }
    }
}

/// Every failure while reading or checking the config is a config error.
fn config_failure(error: Error) -> Failure {
    Failure { code: 2, error }
}

/// Loaded config and the directory relative paths resolve against.
fn load(args: &ConfigArgs) -> Result<(ScenarioConfig, PathBuf), Failure> {
    let (cfg, base) = match &args.config {
        Some(path) => {
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (ScenarioConfig::load(path, &args.overrides), base)
        }
        None => (
            ScenarioConfig::from_toml_with_overrides("", &args.overrides),
            PathBuf::from("."),
        ),
    };
    let cfg = cfg.map_err(config_failure)?;
    cfg.validate(&base).map_err(config_failure)?;
    Ok((cfg, base))
}

fn out_dir(out: Option<PathBuf>, cfg: &ScenarioConfig, base: &Path) -> PathBuf {
    out.unwrap_or_else(|| {
        let d = &cfg.sim.output_dir;
        if d.is_absolute() {
            d.clone()
        } else {
            base.join(d)
        }
    })
}

fn read_segments(dir: &Path, cfg: &ScenarioConfig) -> Result<Vec<Trajectory>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| config_failure(Error::io(dir, e)))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("segment_") && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(config_failure(Error::Config(format!(
            "no segment_*.csv files in {}",
            dir.display()
        ))));
    }
    files
        .iter()
        .map(|f| {
            let text = std::fs::read_to_string(f).map_err(|e| Error::io(f, e))?;
            Trajectory::from_csv(&text, &cfg.platform, cfg.planner.feasibility_tol)
        })
        .collect::<flatfloor::Result<_>>()
        .map_err(config_failure)
}

/// Writes the outputs and turns a diverged run into its exit code.
fn finish(outcome: RunOutcome, dir: &Path) -> Result<(), Failure> {
    let files = emit_outputs(
        dir,
        &outcome.log,
        outcome.metrics.as_ref(),
        Some(&outcome.schedule),
    )?;
    for f in &files {
        eprintln!("wrote {}", f.display());
    }
    if let Some(m) = &outcome.metrics {
        println!(
            "e_x_m={:.6} e_y_m={:.6} e_xy_m={:.6} e_theta_deg={:.4} firings_total={} impulse_Ns={:.1} rw_saturated_fraction={:.4}",
            m.e_x_m, m.e_y_m, m.e_xy_m, m.e_theta_deg, m.firings_total, m.impulse_ns, m.rw_saturated_fraction
        );
    }
    match outcome.failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Plan { cfg, out } => {
            let (cfg, base) = load(&cfg)?;
            let dir = out_dir(out, &cfg, &base);
            let segments = plan_scenario(&cfg, &base)?;
            let files = write_trajectories(&dir, &segments)?;
            output::ensure_dir(&dir)?;
            let wp_path = dir.join("waypoints.csv");
            let wps = scenario_waypoints(&cfg.scenario, &base)?;
            std::fs::write(&wp_path, waypoints_csv(&wps)).map_err(|e| Error::io(&wp_path, e))?;
            eprintln!("planned {} segments into {}", files.len(), dir.display());
            Ok(())
        }
        Command::Track {
            cfg,
            trajectories,
            out,
        } => {
            let (cfg, base) = load(&cfg)?;
            let dir = out_dir(out, &cfg, &base);
            let reference =
                Reference::new(read_segments(&trajectories, &cfg)?).map_err(config_failure)?;
            finish(track_reference(&cfg, &base, reference)?, &dir)
        }
        Command::Run { cfg, out } => {
            let (cfg, base) = load(&cfg)?;
            let dir = out_dir(out, &cfg, &base);
            let segments = plan_scenario(&cfg, &base)?;
            write_trajectories(&dir.join("trajectories"), &segments)?;
            finish(
                track_reference(&cfg, &base, Reference::new(segments)?)?,
                &dir,
            )
        }
        Command::Metrics { log, out } => {
            let log = RunLog::read_csv(&log).map_err(config_failure)?;
            let m = metrics_from_log(&log).map_err(config_failure)?;
            if let Some(path) = out {
                m.write_json(&path)?;
            }
            print!("{}", m.to_json());
            Ok(())
        }
        Command::Plot { log, out } => {
            let log = RunLog::read_csv(&log).map_err(config_failure)?;
            for f in write_plots(&out, &log)? {
                eprintln!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Validate { cfg } => {
            let (cfg, _) = load(&cfg)?;
            print!("{}", cfg.to_toml());
            eprintln!("config ok");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.error);
            ExitCode::from(f.code)
        }
    }
}
