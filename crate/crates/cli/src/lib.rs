//! The `rado` command line: file-level front ends to the core constructions
//! and the harness that runs the acceptance suites.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;
pub mod harness;
pub mod io;

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    /// A well-formed request whose answer is "no": exit 1.
    #[error("{0}")]
    Failure(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: parse error: {msg}")]
    Parse { path: String, msg: String },
    #[error(transparent)]
    Core(#[from] rado_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use rado_core::Error as E;
        match self {
            CliError::Failure(_) => 1,
            CliError::Core(E::Anomaly(_) | E::OracleViolation(_)) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rado", version, about = "Monochromatic path decompositions of edge-colored complete graphs")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Overrides for [`RunConfig`]; any of them may follow the subcommand.
#[derive(Debug, Args, Default)]
pub struct ConfigArgs {
    /// Start from this RunConfig JSON file instead of the defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub pair_len: Option<usize>,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true)]
    pub enum_budget: Option<u64>,
    #[arg(long, global = true)]
    pub theta: Option<usize>,
    #[arg(long, global = true)]
    pub slack: Option<usize>,
    /// Worker threads for hunt and defeat verification (RADO_JOBS overrides).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub halting_stages: Option<usize>,
    #[arg(long, global = true)]
    pub diag_stages: Option<usize>,
}

impl ConfigArgs {
    pub fn resolve(&self, rado_jobs: Option<&str>) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let bytes = std::fs::read(path)
                    .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
                serde_json::from_slice(&bytes)
                    .map_err(|e| CliError::Parse { path: path.display().to_string(), msg: e.to_string() })?
            }
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        set!(seed, pair_len, depth, enum_budget, theta, jobs, halting_stages, diag_stages);
        if self.slack.is_some() {
            cfg.slack = self.slack;
        }
        cfg.apply_env(rado_jobs)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded coloring of [n].
    Gen(GenArgs),
    /// Decompose a coloring into monochromatic paths.
    Decompose(DecomposeArgs),
    /// Check a decomposition (and optionally a trace) against a coloring.
    Verify(VerifyArgs),
    /// Search for colorings of [n] with no r-path decomposition.
    Hunt(HuntArgs),
    /// Run a stagewise limit construction on a finite coloring.
    Simulate(SimulateArgs),
    #[command(subcommand)]
    Adversary(AdversaryCommand),
    /// Run an acceptance suite, or all of them.
    Harness(HarnessArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GenKind {
    Random,
    Stable,
    Constant,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    #[arg(long, value_enum, default_value_t = GenKind::Random)]
    pub kind: GenKind,
    /// Largest threshold of a stable coloring.
    #[arg(long, default_value_t = 10)]
    pub max_threshold: usize,
    /// Color of a constant coloring.
    #[arg(long, default_value_t = 0)]
    pub color: u8,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Gg,
    Brute,
    Ultra,
    Stable,
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleChoice {
    Cofinite,
    Cohesive,
    Majority,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Largeness notion for `ultra`.
    #[arg(long, value_enum, default_value_t = OracleChoice::Cofinite)]
    pub oracle: OracleChoice,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the construction's trace (not available for `brute`).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub coloring: PathBuf,
    #[arg(long)]
    pub decomp: Option<PathBuf>,
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HuntModeArg {
    Exhaustive,
    Random,
}

#[derive(Debug, Args)]
pub struct HuntArgs {
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = HuntModeArg::Exhaustive)]
    pub mode: HuntModeArg,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Most colorings to examine; defaults to the enumeration budget.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimAlgo {
    Always,
    Frozen,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ColorArg {
    Blue,
    Red,
}

impl From<ColorArg> for rado_core::Color {
    fn from(c: ColorArg) -> Self {
        match c {
            ColorArg::Blue => rado_core::Color::BLUE,
            ColorArg::Red => rado_core::Color::RED,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub algo: SimAlgo,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// The color that cannot always be switched to (`frozen` only).
    #[arg(long, value_enum, default_value_t = ColorArg::Blue)]
    pub frozen: ColorArg,
    /// Write the final state as a decomposition file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum AdversaryCommand {
    /// Build the coloring that encodes a toy halting problem.
    Halting(HaltingArgs),
    /// Diagonalize against candidate decomposers and judge the result.
    Diag(DiagArgs),
}

#[derive(Debug, Args)]
pub struct HaltingArgs {
    #[arg(long)]
    pub machines: PathBuf,
    #[arg(long)]
    pub stages: Option<usize>,
    /// Prefix size of the written coloring; defaults to stages + 1.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Decode the intended decomposition and compare with the construction.
    #[arg(long)]
    pub decode: bool,
}

#[derive(Debug, Args)]
pub struct DiagArgs {
    /// Candidate list; the reference candidates when omitted.
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    #[arg(long)]
    pub stages: Option<usize>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write the coloring of [stages + 1].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HarnessArgs {
    /// A suite name, or `all`.
    pub suite: String,
    /// Feed the permanence checker a trace with a falsely flagged strong
    /// switch; `lemma-strong` must then fail.
    #[arg(long)]
    pub inject_fault: bool,
    /// Write the machine-readable summary here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let rado_jobs = std::env::var("RADO_JOBS").ok();
    let result = cli
        .config
        .resolve(rado_jobs.as_deref())
        .and_then(|cfg| commands::dispatch(cli.command, &cfg));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
