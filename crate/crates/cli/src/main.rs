//! `schurtwirl`: Schur–Weyl decompositions and twirling channels from the
//! command line.
//!
//! Exit codes: 0 success, 1 verification or numerical failure, 2 capacity
//! exceeded, 3 unparsable input, 4 state invariant violated.

mod cache;
mod commands;
mod format;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use schurtwirl::Error;

#[derive(Parser)]
#[command(name = "schurtwirl", version, about = "Schur–Weyl decompositions and closed-form twirling channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the block structure of (ℂ^d)^⊗t.
    Decompose {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Apply a twirling channel to a state file.
    Twirl(TwirlArgs),
    /// Tabulate the SLOCC block coefficients β_k.
    Beta {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value = "exp")]
        measure: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the invariant and oracle suite.
    Verify {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare an empirical twirl against its closed form.
    Sample(SampleArgs),
}

#[derive(Args, Clone, Copy)]
pub struct SpaceArgs {
    /// Local dimension.
    #[arg(short = 'd', default_value_t = 2)]
    pub d: usize,
    /// Number of copies.
    #[arg(short = 't')]
    pub t: usize,
}

#[derive(Args, Clone, Copy)]
pub struct OutputArgs {
    /// Machine-readable JSON output.
    #[arg(long)]
    pub json: bool,
    /// Rebuild the Schur basis instead of using the on-disk cache.
    #[arg(long)]
    pub no_cache: bool,
}

#[derive(Args, Clone, Copy)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo sample count.
    #[arg(short = 'N', default_value_t = 50_000)]
    pub samples: usize,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Unitary,
    Symmetric,
    Slocc,
}

impl MapKind {
    pub fn name(self) -> &'static str {
        match self {
            MapKind::Unitary => "unitary",
            MapKind::Symmetric => "symmetric",
            MapKind::Slocc => "slocc",
        }
    }
}

#[derive(Args)]
pub struct TwirlArgs {
    /// JSON matrix container holding the input state.
    pub state: PathBuf,
    #[arg(long, value_enum)]
    pub map: MapKind,
    /// Local dimension; t is inferred from the matrix size.
    #[arg(short = 'd', default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value = "exp")]
    pub measure: String,
    /// Apply the channel this many times.
    #[arg(long, default_value_t = 1)]
    pub iterate: u32,
    /// Where to write the twirled state (default: next to the input).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Accept states with trace below one.
    #[arg(long)]
    pub allow_subnormalized: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args)]
pub struct SampleArgs {
    /// Optional input state; a random state is drawn from the seed otherwise.
    pub state: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "unitary")]
    pub map: MapKind,
    #[arg(short = 'd', default_value_t = 2)]
    pub d: usize,
    /// Number of copies (required without a state file).
    #[arg(short = 't')]
    pub t: Option<usize>,
    #[arg(long, default_value = "exp")]
    pub measure: String,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Accepted for symmetry with the other commands; output is always JSON.
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub no_cache: bool,
}

/// Command failure carrying its exit code.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Capacity { .. } => 2,
            Error::Parse(_) | Error::Io(_) | Error::Argument(_) => 3,
            Error::State(_) | Error::Postselection { .. } => 4,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Decompose { space, output } => commands::decompose(space, output),
        Command::Twirl(args) => commands::twirl(&args),
        Command::Beta { space, measure, output } => commands::beta(space, &measure, output),
        Command::Verify { space, sampling, output } => verify::run(space, sampling, output),
        Command::Sample(args) => commands::sample(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
