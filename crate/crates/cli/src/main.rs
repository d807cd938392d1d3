//! `entrain`: phase reduction, waveform synthesis, tongue prediction and
//! simulation checks from the command line.

mod commands;
mod manifest;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "entrain",
    version,
    about = "Optimal subharmonic entrainment of nonlinear oscillators"
)]
pub struct Cli {
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Directory for all outputs.
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,
    /// Accepted for scripting; every computation is deterministic.
    #[arg(long, global = true)]
    pub seedless: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Find the limit cycle and phase response curve of a model.
    Prc(PrcArgs),
    /// Synthesize an optimal forcing waveform.
    Synth(SynthArgs),
    /// Predict (and optionally simulate) the Arnold tongue of a waveform.
    Tongue(TongueArgs),
    /// Measure the entrainment rate of a waveform.
    Rate(RateArgs),
}

#[derive(Args, Debug)]
pub struct PrcArgs {
    /// Model configuration JSON.
    pub config: PathBuf,
    /// Also run the adjoint method and report the deviation.
    #[arg(long)]
    pub adjoint: bool,
    #[arg(long, default_value_t = 512)]
    pub n_phases: usize,
    #[arg(long, default_value_t = 64)]
    pub order: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Min,
    Fast,
    Ensemble,
    Range,
}

#[derive(Args, Debug)]
pub struct TargetArgs {
    /// Target frequency Ω (rad per time unit).
    #[arg(long, conflicts_with = "target_factor")]
    pub target: Option<f64>,
    /// Target as a multiple of the natural frequency ω.
    #[arg(long)]
    pub target_factor: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Phase model JSON.
    pub model: PathBuf,
    #[arg(long)]
    pub ratio: String,
    #[command(flatten)]
    pub target: TargetArgs,
    #[arg(long, value_enum, default_value = "min")]
    pub family: FamilyArg,
    /// Mean-square energy (fast, range).
    #[arg(long)]
    pub power: Option<f64>,
    /// Slowest natural frequency of the ensemble.
    #[arg(long)]
    pub omega1: Option<f64>,
    /// Fastest natural frequency of the ensemble.
    #[arg(long)]
    pub omega2: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TongueMode {
    Theory,
    PhaseSim,
    StateSim,
    All,
}

#[derive(Args, Debug)]
pub struct TongueArgs {
    /// Phase model JSON.
    pub model: PathBuf,
    /// Waveform JSON.
    pub waveform: PathBuf,
    #[arg(long, value_enum, default_value = "theory")]
    pub mode: TongueMode,
    /// Natural-frequency axis at the waveform's fixed target.
    #[arg(long)]
    pub ensemble: bool,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Relative half-width of the grid.
    #[arg(long, default_value_t = 0.1)]
    pub span: f64,
    /// Model configuration JSON (state-space simulation).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Phase-model RK4 steps per entrained period.
    #[arg(long, default_value_t = 256)]
    pub steps: usize,
    /// State-space RK4 step bound.
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
}

#[derive(Args, Debug)]
pub struct RateArgs {
    /// Phase model JSON.
    pub model: PathBuf,
    /// Waveform JSON.
    pub waveform: PathBuf,
    /// Retarget the waveform to this Ω.
    #[arg(long)]
    pub target: Option<f64>,
    /// Simulate the full model instead of the phase model.
    #[arg(long)]
    pub state_space: bool,
    /// Model configuration JSON (required with --state-space).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.4)]
    pub offset: f64,
    #[arg(long, default_value_t = 60)]
    pub cycles: usize,
    #[arg(long, default_value_t = 256)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
}

/// Failure with its exit code: 1 usage, 2 numerical, 3 infeasible.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<entrain::Error> for CliError {
    fn from(e: entrain::Error) -> Self {
        let code = if e.is_usage() {
            1
        } else if e.is_infeasible() {
            3
        } else {
            2
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ENTRAIN_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure {n} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
