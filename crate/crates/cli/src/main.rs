use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod artifacts;
mod commands;
mod config;
mod svg;

#[derive(Parser, Debug)]
#[command(name = "qvtrack", version, about = "Seeded tracking experiments on a statevector simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config for the subcommand; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Overlap readout, overriding the config.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,

    /// Shots per sampled overlap estimate.
    #[arg(long, global = true)]
    shots: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Projection,
    Sampled,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Track an object through a 1D or 2D video with the classical filter.
    ClassicalTrack,
    /// Compare quantum training and detection with classical oracles.
    QuantumVerify,
    /// Object disappearance experiment over seeded runs.
    Disappearance,
    /// Match a video against a template path.
    MotionMatch,
    /// Certify truncated-Taylor evolution against the exact exponential.
    LcuCert,
    /// Check the surrogate-label state preparation.
    StatePrepCheck,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let globals = commands::Globals { config: cli.config, seed: cli.seed, out: cli.out, mode: cli.mode, shots: cli.shots };
    let result = match cli.command {
        Command::ClassicalTrack => commands::track::run(&globals),
        Command::QuantumVerify => commands::verify::run(&globals),
        Command::Disappearance => commands::disappearance::run(&globals),
        Command::MotionMatch => commands::motion::run(&globals),
        Command::LcuCert => commands::lcu::run(&globals),
        Command::StatePrepCheck => commands::state_prep::run(&globals),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
