//! `qg`: sampling, verification and classification runs emitting JSON lines.
//!
//! Exit codes: 0 all checks pass, 2 verification failure, 64 usage error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use qg_core::algebra::GaussRat;
use qg_core::diffops::Fault;
use qg_core::phase::{random_rational_pencil, Pencil};
use qg_core::verify::{Mode, DEFAULT_TOL};

pub const EXIT_FAILURE: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "qg", version, about = "Gaudin-type system on an intersection of two quadrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit seeded constrained phase points with their constraint residuals.
    Sample(Common),
    /// Run every verification suite and emit one consolidated report.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
        /// Skip the operator suite.
        #[arg(long)]
        no_diffops: bool,
    },
    /// Very-stable/wobbly verdict with a re-verified witness when wobbly.
    Classify {
        #[command(flatten)]
        common: Common,
        /// JSON phase points, one per line; `y` may be omitted.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Exact operator relations on a rational pencil.
    DiffopsVerify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
    },
    /// Skew-adjoint model against the Higgs field.
    OrthomodelVerify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// CSV of root data and verdicts over sampled points.
    Sweep(Common),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Number of marked points N (at least 5).
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// Comma-separated marked points (`a`, `a/b`, `a+bi`) or `random:SEED`.
    #[arg(long)]
    pub mu: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Degree bound for the operator checks.
    #[arg(long)]
    pub dmax: Option<u32>,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Exact,
    Float,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Float => Mode::Float,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaultArg {
    DeltaSign,
}

impl From<FaultArg> for Fault {
    fn from(_: FaultArg) -> Self {
        Fault::DeltaSign
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

impl From<qg_core::Error> for CliError {
    fn from(e: qg_core::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

impl Common {
    pub fn validate(&self) -> CliResult<()> {
        if !(self.tol > 0.0) {
            return Err(CliError::Usage(format!("--tol must be positive, got {}", self.tol)));
        }
        if self.n.is_some_and(|n| n < 5) {
            return Err(CliError::Usage(format!("--n must be at least 5, got {}", self.n.unwrap_or(0))));
        }
        Ok(())
    }

    /// The pencil from `--mu`/`--n`, defaulting to `0, 1, ..., N-1`.
    pub fn pencil(&self) -> CliResult<Pencil<GaussRat>> {
        self.validate()?;
        let usage = |e: qg_core::Error| CliError::Usage(e.to_string());
        match self.mu.as_deref() {
            None => Pencil::standard(self.n.unwrap_or(5)).map_err(usage),
            Some(list) => {
                if let Some(seed) = list.strip_prefix("random:") {
                    let seed = seed.trim().parse().map_err(|_| CliError::Usage(format!("bad seed in --mu {list:?}")))?;
                    return random_rational_pencil(self.n.unwrap_or(5), seed).map_err(usage);
                }
                let mu = list
                    .split(',')
                    .map(|s| s.trim().parse::<GaussRat>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(usage)?;
                if let Some(n) = self.n.filter(|&n| n != mu.len()) {
                    return Err(CliError::Usage(format!("--n {n} but --mu lists {} points", mu.len())));
                }
                Pencil::new(mu).map_err(usage)
            }
        }
    }

    pub fn dmax(&self, n_points: usize) -> u32 {
        self.dmax.unwrap_or_else(|| qg_core::diffops::default_dmax(n_points))
    }
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("QG_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::Usage(format!("QG_THREADS={v:?} is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> CliResult<bool> {
    use commands::*;
    match cli.command {
        Command::Sample(c) => cmd_sample(&c),
        Command::Verify { common, inject_fault, no_diffops } => cmd_verify(&common, inject_fault.map(Fault::from), !no_diffops),
        Command::Classify { common, input } => cmd_classify(&common, input.as_deref()),
        Command::DiffopsVerify { common, inject_fault } => cmd_diffops(&common, inject_fault.map(Fault::from)),
        Command::OrthomodelVerify { common, input } => cmd_orthomodel(&common, input.as_deref()),
        Command::Sweep(c) => cmd_sweep(&c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = thread_pool().and_then(|pool| pool.install(|| run(cli)));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILURE),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Failed(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
