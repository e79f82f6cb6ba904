use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod verify;

use config::{DiagnoseConfig, InitKind, MinimizeConfig, Overrides, SweepConfig, TownesConfig};
use error::{CliError, CliResult};

/// Ground states of the rotating 2D focusing NLS energy and their collapse
/// onto the Townes soliton.
#[derive(Debug, Parser)]
#[command(name = "rotc", version)]
struct Cli {
    /// Print the resolved configuration and progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the Townes soliton and print its constants as JSON.
    Townes(TownesArgs),
    /// Compute a ground state at one (omega, a/a*).
    Minimize(MinimizeArgs),
    /// Collapse diagnostics of a stored field.
    Diagnose(DiagnoseArgs),
    /// Run a parameter sweep and write reports, fits and plots.
    Sweep(SweepArgs),
    /// Run the built-in numerical checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct TownesArgs {
    /// Flat dotted-key JSON config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    shoot_tol: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    spacing: Option<f64>,
    /// Write the radial profile as CSV (r, Q).
    #[arg(long)]
    profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MinimizeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    omega: Option<f64>,
    /// Interaction strength as a fraction of a*.
    #[arg(long)]
    a_frac: Option<f64>,
    /// Grid points per side (power of two).
    #[arg(long)]
    n: Option<usize>,
    /// Half-width of the square domain.
    #[arg(long)]
    extent: Option<f64>,
    /// Residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    pin_strength: Option<f64>,
    #[arg(long)]
    recenter: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_init)]
    init: Option<InitKind>,
    /// Output field snapshot.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Output density along the x2 = 0 row as CSV.
    #[arg(long)]
    density_slice: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Field snapshot to analyze.
    #[arg(long)]
    field: Option<PathBuf>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    a_frac: Option<f64>,
    /// Output JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Sweep plan (flat dotted-key JSON).
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write a snapshot of every converged field.
    #[arg(long)]
    keep_fields: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Skip the slow checks.
    #[arg(long)]
    quick: bool,
    /// Replace the computed a* (fault injection).
    #[arg(long)]
    a_star_override: Option<f64>,
}

fn parse_init(s: &str) -> Result<InitKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown init {s:?}; expected auto, gaussian, soliton or random"))
}

fn show<T: serde::Serialize>(verbose: bool, cfg: &T) {
    if verbose {
        let flat = config::flatten(&serde_json::to_value(cfg).expect("serializable config"));
        eprintln!("{}", serde_json::to_string_pretty(&flat).expect("serializable config"));
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Townes(a) => {
            let mut o = Overrides::default();
            o.set("shoot_tol", a.shoot_tol).set("r_max", a.r_max).set("spacing", a.spacing).set("profile", a.profile);
            let cfg = TownesConfig::load(a.config.as_deref(), o)?;
            show(verbose, &cfg);
            commands::townes(&cfg)
        }
        Command::Minimize(a) => {
            let mut o = Overrides::default();
            o.set("omega", a.omega)
                .set("a_frac", a.a_frac)
                .set("n", a.n)
                .set("extent", a.extent)
                .set("init", a.init)
                .set("solver.grad_tol", a.tol)
                .set("solver.max_iters", a.max_iters)
                .set("solver.step", a.step)
                .set("solver.momentum", a.momentum)
                .set("solver.pin_strength", a.pin_strength)
                .set("solver.seed", a.seed)
                .flag("solver.recenter", a.recenter)
                .set("out", a.out)
                .set("report", a.report)
                .set("density_slice", a.density_slice);
            let cfg = MinimizeConfig::load(a.config.as_deref(), o)?;
            show(verbose, &cfg);
            commands::minimize(&cfg)
        }
        Command::Diagnose(a) => {
            let mut o = Overrides::default();
            o.set("field", a.field).set("omega", a.omega).set("a_frac", a.a_frac).set("report", a.report);
            let cfg = DiagnoseConfig::load(a.config.as_deref(), o)?;
            show(verbose, &cfg);
            commands::diagnose(&cfg)
        }
        Command::Sweep(a) => {
            let mut o = Overrides::default();
            o.set("workers", a.workers).set("seed", a.seed).flag("keep_fields", a.keep_fields);
            let cfg = SweepConfig::load(a.plan.as_deref(), o)?;
            show(verbose, &cfg.plan);
            commands::sweep(&cfg, &a.out, verbose)
        }
        Command::Verify(a) => verify::run(verify::VerifyOptions { quick: a.quick, a_star_override: a.a_star_override }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(_) => eprintln!("error: {e}"),
                _ => eprintln!("rotc: {e}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
