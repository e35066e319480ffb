//! `urvc-sim`: scenario runner for the ultra-reliable vehicular broadcast
//! simulator.
//!
//! Subcommands: `run` (one scenario), `sweep` (scenario per axis value),
//! `tradeoff` (channel availability/reliability curve), `rrm-availability`
//! (power-control availability over SINR targets), `validate` (config check
//! without simulation). Results go to stdout, or to a deterministic file
//! set under `--out DIR`. Logging is controlled by the `URVC_SIM_LOG`
//! environment variable (`error`..`trace`).
//!
//! Exit codes: 0 success, 1 configuration error (with file and line
//! context), 2 runtime error.

mod configs;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use urvc_core::channel::tradeoff_curve;
use urvc_core::engine::{run_scenario, sweep, ScenarioConfig};
use urvc_core::rrm::availability_sweep;
use urvc_core::seed;

use configs::{load_rrm_sweep, load_scenario, load_tradeoff, validate_any, ValidatedShape};
use emit::Format;

#[derive(Parser)]
#[command(
    name = "urvc-sim",
    version,
    about = "Monte Carlo simulator for ultra-reliable vehicular broadcast"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write output files into this directory instead of stdout.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override the config file's master seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Stdout rendering when --out is absent.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and report its metrics.
    Run { config: PathBuf },
    /// Run the scenario once per value of a numeric config axis.
    Sweep {
        config: PathBuf,
        /// Config field to vary (e.g. n_nodes, n_slots, seed, rate_hz).
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Availability/conditional-reliability tradeoff over gate thresholds.
    Tradeoff { config: PathBuf },
    /// Power-control availability over SINR targets.
    RrmAvailability { config: PathBuf },
    /// Check a config file (including any service composition) and exit.
    Validate { config: PathBuf },
}

/// Errors after configuration is settled: simulation or I/O.
fn runtime_err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("URVC_SIM_LOG")).init();
    let cli = Cli::parse();

    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }

    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("runtime error: {msg}");
            ExitCode::from(2)
        }
    }
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<configs::ConfigError> for Failure {
    fn from(e: configs::ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Run { config } => {
            let scenario = load_scenario(config, cli.seed)?;
            run_one(cli, &scenario)
        }
        Command::Sweep { config, axis, values } => {
            let scenario = load_scenario(config, cli.seed)?;
            run_sweep(cli, &scenario, axis, values)
        }
        Command::Tradeoff { config } => {
            let cfg = load_tradeoff(config, cli.seed)?;
            info!("tradeoff: {} thresholds, {} draws", cfg.thresholds.len(), cfg.n_draws);
            let mut rng = seed::stream(cfg.seed, seed::domain::CHANNEL_EPISODE, 0);
            let points = tradeoff_curve(&cfg.fading, &cfg.link, &cfg.thresholds, cfg.n_draws, &mut rng)
                .map_err(|e| Failure::Runtime(runtime_err(e)))?;
            match &cli.out {
                Some(dir) => {
                    let written = emit::write_tradeoff_outputs(dir, &points)
                        .map_err(|e| Failure::Runtime(runtime_err(e)))?;
                    log_written(&written);
                }
                None => match cli.format {
                    Format::Json => print!("{}", emit::json_line(&points)),
                    Format::Csv => {
                        emit::tradeoff_csv(&points, std::io::stdout().lock())
                            .map_err(|e| Failure::Runtime(runtime_err(e)))?;
                    }
                },
            }
            Ok(())
        }
        Command::RrmAvailability { config } => {
            let cfg = load_rrm_sweep(config, cli.seed)?;
            info!("rrm-availability: {} targets, {} drops", cfg.gammas_db.len(), cfg.n_drops);
            let points = availability_sweep(&cfg.rrm, &cfg.gammas_db, cfg.n_drops, cfg.seed)
                .map_err(|e| Failure::Runtime(runtime_err(e)))?;
            match &cli.out {
                Some(dir) => {
                    let written = emit::write_rrm_outputs(dir, &points)
                        .map_err(|e| Failure::Runtime(runtime_err(e)))?;
                    log_written(&written);
                }
                None => match cli.format {
                    Format::Json => print!("{}", emit::json_line(&points)),
                    Format::Csv => {
                        urvc_core::rrm::write_availability_csv(&points, std::io::stdout().lock())
                            .map_err(|e| Failure::Runtime(runtime_err(e)))?;
                    }
                },
            }
            Ok(())
        }
        Command::Validate { config } => {
            match validate_any(config)? {
                ValidatedShape::Scenario { warnings } => {
                    println!("ok: valid scenario config");
                    for w in warnings {
                        println!("warning: {w}");
                    }
                }
                ValidatedShape::Tradeoff => println!("ok: valid tradeoff config"),
                ValidatedShape::RrmSweep => println!("ok: valid rrm-availability config"),
            }
            Ok(())
        }
    }
}

fn run_one(cli: &Cli, scenario: &ScenarioConfig) -> Result<(), Failure> {
    info!(
        "run: {} nodes, {} slots, seed {}",
        scenario.n_nodes, scenario.n_slots, scenario.seed
    );
    let output = run_scenario(scenario).map_err(|e| Failure::Runtime(runtime_err(e)))?;
    match &cli.out {
        Some(dir) => {
            let written = emit::write_run_outputs(dir, &output)
                .map_err(|e| Failure::Runtime(runtime_err(e)))?;
            log_written(&written);
        }
        None => match cli.format {
            Format::Json => print!("{}", output.report.to_json()),
            Format::Csv => {
                urvc_core::metrics::write_cdf_csv(&output.cdf, std::io::stdout().lock())
                    .map_err(|e| Failure::Runtime(runtime_err(e)))?;
            }
        },
    }
    Ok(())
}

fn run_sweep(
    cli: &Cli,
    scenario: &ScenarioConfig,
    axis: &str,
    values: &[f64],
) -> Result<(), Failure> {
    // Check the axis up front so a typo is a config error, not a runtime one.
    scenario
        .with_axis(axis, values[0])
        .map_err(|e| Failure::Config(e.to_string()))?;
    info!("sweep: axis {axis}, {} values", values.len());
    let outputs = sweep(scenario, axis, values).map_err(|e| Failure::Runtime(runtime_err(e)))?;
    match &cli.out {
        Some(dir) => {
            let written = emit::write_sweep_outputs(dir, axis, values, &outputs)
                .map_err(|e| Failure::Runtime(runtime_err(e)))?;
            log_written(&written);
        }
        None => match cli.format {
            Format::Json => {
                let reports: Vec<_> = outputs.iter().map(|o| &o.report).collect();
                print!("{}", emit::json_line(&reports));
            }
            Format::Csv => {
                emit::sweep_csv(axis, values, &outputs, std::io::stdout().lock())
                    .map_err(|e| Failure::Runtime(runtime_err(e)))?;
            }
        },
    }
    Ok(())
}

fn log_written(paths: &[PathBuf]) {
    for p in paths {
        info!("wrote {}", p.display());
    }
}
