//! Command-line surface: scenario configs, the bundled example gallery,
//! ε-sweeps, and CSV/JSON report emission.
//!
//! Exit codes: 0 on verdict success, 2 on hypothesis failure, 1 on internal
//! error. `COLOMBEAU_THREADS` caps the worker pool.

mod config;
mod gallery;
mod report;
mod run;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use colombeau::ivp::Method;
use report::OutputFormat;
use run::{Overrides, RunError, EXIT_INTERNAL};
use sweep::Quantity;

#[derive(Parser)]
#[command(
    name = "colombeau",
    version,
    about = "Certify and solve generalized ODE and total-differential problems on ε-grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Override the grid exponents, e.g. --grid 0..24 for ε = 2^-k.
    #[arg(long, value_parser = parse_grid_range)]
    grid: Option<(u32, u32)>,
    /// Integration method.
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    /// Output directory for reports and tables.
    #[arg(long, default_value = "colombeau-out")]
    out: PathBuf,
    /// Table format: csv files plus report.json, or everything in json.
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: OutputFormat,
}

fn parse_grid_range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected k0..k1, got `{s}`"))?;
    let k0: u32 = a.trim().parse().map_err(|_| format!("bad k0 in `{s}`"))?;
    let k1: u32 = b.trim().parse().map_err(|_| format!("bad k1 in `{s}`"))?;
    if k0 > k1 {
        return Err("k0 must not exceed k1".into());
    }
    Ok((k0, k1))
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "rk" => Ok(Method::AdaptiveRk),
        "picard" => Ok(Method::Picard),
        other => Err(format!("unknown method `{other}` (use rk|picard)")),
    }
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse::<OutputFormat>()
}

fn parse_quantity(s: &str) -> Result<Quantity, String> {
    s.parse::<Quantity>()
}

#[derive(Subcommand)]
enum Command {
    /// Certify the hypotheses of a scenario without solving.
    Certify {
        /// Gallery name or config path (TOML or JSON).
        config: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Certify and solve an initial value scenario (ivp, ivp-param or
    /// ivp-initial-family).
    Solve {
        config: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Sweep a per-ε quantity and fit its asymptotic order.
    Sweep {
        config: String,
        /// One of sup-norm, escape-time, gap, asymmetry.
        #[arg(long, value_parser = parse_quantity)]
        quantity: Quantity,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Integrability test and ray solve for a total-differential scenario.
    Frobenius {
        config: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// List the bundled example scenarios.
    Examples,
    /// Full pipeline for any scenario kind.
    Run {
        config: String,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn overrides(common: &CommonOpts) -> Overrides {
    Overrides {
        grid: common.grid,
        method: common.method,
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("COLOMBEAU_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, RunError> {
    match cli.command {
        Command::Examples => {
            for entry in gallery::GALLERY {
                println!("{:<26} {}", entry.name, entry.blurb);
            }
            Ok(0)
        }
        Command::Certify { config, common } => {
            let sc = gallery::resolve(&config)?;
            run::certify_scenario(&sc, &common.out, common.format, &overrides(&common))
        }
        Command::Run { config, common } => {
            let sc = gallery::resolve(&config)?;
            run::run_scenario(&sc, &common.out, common.format, &overrides(&common))
        }
        Command::Solve { config, common } => {
            let sc = gallery::resolve(&config)?;
            if sc.kind == config::ScenarioKind::Frobenius {
                return Err(RunError::Config(config::ConfigError::Field {
                    field: "kind".into(),
                    msg: "use the frobenius subcommand for total-differential scenarios".into(),
                }));
            }
            run::run_scenario(&sc, &common.out, common.format, &overrides(&common))
        }
        Command::Frobenius { config, common } => {
            let sc = gallery::resolve(&config)?;
            if sc.kind != config::ScenarioKind::Frobenius {
                return Err(RunError::Config(config::ConfigError::Field {
                    field: "kind".into(),
                    msg: "the frobenius subcommand needs a frobenius scenario".into(),
                }));
            }
            run::run_scenario(&sc, &common.out, common.format, &overrides(&common))
        }
        Command::Sweep {
            config,
            quantity,
            common,
        } => {
            let sc = gallery::resolve(&config)?;
            sweep::sweep_scenario(&sc, quantity, &common.out, common.format, &overrides(&common))
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INTERNAL as u8)
        }
    }
}
