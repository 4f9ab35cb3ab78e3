mod commands;
mod config;
mod output;
mod svg;

use std::process::ExitCode;

use clap::{error::ErrorKind, Parser, Subcommand};

use crate::config::{CommonArgs, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] bicwave::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 4,
            CliError::Core(e) if e.is_domain() => 2,
            CliError::Core(_) => 3,
        }
    }
}

/// Bound states in the continuum of emitter arrays coupled to a massive
/// one-dimensional waveguide.
#[derive(Parser)]
#[command(name = "bicwave", version, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Laplacian spectrum and wave catalog at E_nu.
    #[command(allow_negative_numbers = true)]
    Spectrum,
    /// Emitter amplitudes and photon field of one bound state.
    #[command(allow_negative_numbers = true)]
    Bic,
    /// Multimer decompositions of an n-emitter chain.
    #[command(allow_negative_numbers = true)]
    Multimer,
    /// Evanescent couplings and the self-energy matrix at one energy.
    #[command(allow_negative_numbers = true)]
    Selfenergy,
    /// Brute-force check against a discretized Hamiltonian.
    #[command(allow_negative_numbers = true)]
    Oracle,
    /// Regenerate the data behind every figure.
    #[command(allow_negative_numbers = true)]
    Figures,
}

fn main() -> ExitCode {
    // sweeps parallelize across jobs; sequential kernels keep output independent of --jobs
    faer::set_global_parallelism(faer::Par::Seq);
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(4),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bicwave: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.common)?;
    if let Some(w) = cfg.regime_warning() {
        eprintln!("{w}");
    }
    let written = match cli.command {
        Command::Spectrum => commands::spectrum(&cfg)?,
        Command::Bic => commands::bic(&cfg)?,
        Command::Multimer => commands::multimer(&cfg)?,
        Command::Selfenergy => commands::selfenergy(&cfg)?,
        Command::Oracle => commands::oracle(&cfg)?,
        Command::Figures => commands::figures(&cfg)?,
    };
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}
