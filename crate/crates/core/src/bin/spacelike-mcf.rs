use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spacelike_mcf::io::experiment::{self, ExperimentError, Report};
use spacelike_mcf::io::{load_config, RunConfig};

#[derive(Parser)]
#[command(name = "spacelike-mcf", version, about = "Graphical spacelike mean curvature flow experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `dotted.key=value`, applied before validation. Repeatable.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Run the flow and write diagnostics, snapshots and results.
    Run,
    /// Run the flow and fail unless every configured check passes.
    Verify,
    /// Residual refinement studies of the closed-form solutions.
    Oracle,
    /// Self-expander residuals in rescaled time.
    Renorm,
    /// G2-structures of a graph in R^{3,3}: closedness and torsion.
    G2,
}

fn threads() -> Result<(), ExperimentError> {
    let Ok(raw) = std::env::var("SPACELIKE_MCF_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ExperimentError::Config(format!("SPACELIKE_MCF_THREADS={raw} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| ExperimentError::Failed(e.to_string()))
}

fn config(cli: &Cli) -> Result<Option<RunConfig>, ExperimentError> {
    match &cli.config {
        Some(p) => Ok(Some(load_config(p, &cli.overrides)?)),
        None if cli.overrides.is_empty() => Ok(None),
        None => Err(ExperimentError::Config("--override needs --config".into())),
    }
}

fn dispatch(cli: &Cli) -> Result<Report, ExperimentError> {
    threads()?;
    let cfg = config(cli)?;
    let out = cli.out.as_deref();
    if let Command::Oracle = cli.command {
        return experiment::oracle_command(cfg.as_ref(), out);
    }
    let cfg = cfg.ok_or_else(|| ExperimentError::Config("--config is required".into()))?;
    match cli.command {
        Command::Run => experiment::run_command(&cfg, out),
        Command::Verify => experiment::verify_command(&cfg, out),
        Command::Renorm => experiment::renorm_command(&cfg, out),
        Command::G2 => experiment::g2_command(&cfg, out),
        Command::Oracle => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(report) => {
            for v in &report.verdicts {
                println!(
                    "{} {:<24} worst margin {:+.6e} (tolerance {:.1e}) at t = {}",
                    if v.pass { "PASS" } else { "FAIL" },
                    v.check,
                    v.worst_margin,
                    v.tolerance,
                    v.worst_t
                );
            }
            if let Some(p) = &report.results {
                println!("results: {}", p.display());
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
