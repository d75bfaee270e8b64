//! `gpw`: build, verify and study generalized plane wave bases.
//!
//! Exit codes: 0 pass, 1 acceptance failure, 2 configuration or usage error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{ConfigError, RunContext, BASIS_FILE};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "gpw", version, about = "Generalized plane wave quasi-Trefftz bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the configuration seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the summary line.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build the GPW family and write basis.json.
    Build(Common),
    /// Check the split hypotheses and every function of a basis file.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Basis file; defaults to `<out>/basis.json`.
        #[arg(long)]
        basis: Option<PathBuf>,
    },
    /// Taylor ranks of the plane-wave and GPW families.
    Rank(Common),
    /// Best-approximation convergence study over the configured radii.
    Converge(Common),
}

fn run(command: Command) -> anyhow::Result<(bool, String, bool)> {
    let common = match &command {
        Command::Build(c) | Command::Rank(c) | Command::Converge(c) => c,
        Command::Verify { common, .. } => common,
    };
    let config = RunConfig::load(&common.config).map_err(ConfigError)?;
    std::fs::create_dir_all(&common.out).map_err(|e| ConfigError(e.into()))?;
    let ctx = RunContext { seed: common.seed.unwrap_or(config.seed), config, out: common.out.clone() };
    let quiet = common.quiet;
    let outcome = match &command {
        Command::Build(_) => commands::build(&ctx)?,
        Command::Verify { basis, .. } => {
            let path = basis.clone().unwrap_or_else(|| ctx.out.join(BASIS_FILE));
            commands::verify(&ctx, &path)?
        }
        Command::Rank(_) => commands::rank(&ctx)?,
        Command::Converge(_) => commands::converge(&ctx)?,
    };
    Ok((outcome.passed, outcome.summary, quiet))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((passed, summary, quiet)) => {
            if !quiet {
                println!("{summary}");
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
