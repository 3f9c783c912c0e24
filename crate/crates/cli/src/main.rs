//! `causalnet`: learn, query and evaluate discrete causal networks from the
//! command line. Every run that names an `--out` directory also writes a
//! `manifest.txt` there, from which `replay` reproduces the outputs.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};

mod commands;
mod manifest;

use manifest::Manifest;

#[derive(Debug, Parser)]
#[command(name = "causalnet", version, about = "Causal networks over multi-cohort data with missing values")]
pub struct Cli {
    /// Worker threads for parallel scoring and prediction; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test whether X and Y are d-separated given Z.
    Dsep(DsepArgs),
    /// Classify the missingness mechanism of an m-graph and check recoverability.
    Classify(ClassifyArgs),
    /// Recover a joint distribution by inverse-probability weighting.
    Recover(RecoverArgs),
    /// Estimate P(outcome | do(treatment)) by back-door adjustment.
    Effect(EffectArgs),
    /// Hill-climb a structure on the complete cases and fit its parameters.
    Learn(LearnArgs),
    /// Structural EM from a prior graph.
    Sem(SemArgs),
    /// Score rows with P(target = level | observed cells).
    Predict(PredictArgs),
    /// Sample a two-cohort dataset with missing cells.
    Simulate(SimulateArgs),
    /// Compare the prior-only, prior+SEM and naive Bayes models by AUC.
    Benchmark(BenchmarkArgs),
    /// Re-run a recorded manifest and check that the outputs are identical.
    Replay(ReplayArgs),
}

/// Comma-separated lists; an empty string is the empty list.
pub(crate) fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::to_string).collect()
}

#[derive(Debug, Args)]
pub struct DsepArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Comma-separated node names.
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    #[arg(long, default_value = "")]
    z: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    schema: PathBuf,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    input: DataArgs,
    /// Variables of the recovered joint, comma-separated.
    #[arg(long)]
    vars: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EffectArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    treatment: String,
    /// Treatment level to set.
    #[arg(long)]
    level: String,
    #[arg(long)]
    outcome: String,
    /// Adjustment set; the smallest back-door set is searched when absent.
    #[arg(long)]
    adjust: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 5)]
    max_parents: usize,
    /// Pseudo-count added to every CPT cell.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Seeded perturbation restarts per hill climb.
    #[arg(long, default_value_t = 0)]
    restarts: usize,
}

#[derive(Debug, Clone, Args)]
pub struct EmArgs {
    #[arg(long, default_value_t = 20)]
    max_iterations: usize,
    /// Relative BIC gain below which SEM stops.
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[command(flatten)]
    input: DataArgs,
    /// Prior graph: its edges are kept, its `[forbidden]` edges never added.
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SemArgs {
    #[command(flatten)]
    input: DataArgs,
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    em: EmArgs,
    /// Re-estimate parameters only, keeping the prior graph.
    #[arg(long)]
    fixed_structure: bool,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    network: PathBuf,
    #[command(flatten)]
    input: DataArgs,
    #[arg(long)]
    target: String,
    /// Level whose posterior probability is the score.
    #[arg(long)]
    level: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Built-in simulator configuration (`default`).
    #[arg(long, conflicts_with = "network")]
    preset: Option<String>,
    /// Ground-truth network including selection and indicator nodes.
    #[arg(long)]
    network: Option<PathBuf>,
    /// Selection node of `--network`.
    #[arg(long, default_value = "cohort")]
    cohort: String,
    /// Rows per cohort level for `--network`, as `LEVEL=N,...`.
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Simulator preset; each seed draws a fresh dataset.
    #[arg(long, conflicts_with_all = ["data", "schema"])]
    simulate: Option<String>,
    /// Fixed dataset instead of a simulator; seeds vary the split and SEM.
    #[arg(long, requires = "schema")]
    data: Option<PathBuf>,
    #[arg(long, requires = "data")]
    schema: Option<PathBuf>,
    /// Prior graph; the shipped clinical prior when absent.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Number of runs, with seeds `first_seed .. first_seed + seeds`.
    #[arg(long)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    #[arg(long, default_value = "cvds")]
    target: String,
    #[arg(long, default_value = "yes")]
    positive: String,
    /// Training fraction per cohort level, as `LEVEL=F,...`.
    #[arg(long, default_value = "PBC=0.667,CBC=1")]
    train_fractions: String,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    em: EmArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Directory for the reproduced outputs.
    #[arg(long)]
    out: PathBuf,
}

/// Error raised for malformed invocations that clap cannot catch; exits 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(matches: &ArgMatches) -> anyhow::Result<()> {
    let cli = Cli::from_arg_matches(matches)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    if let Command::Replay(args) = &cli.command {
        return manifest::replay(args);
    }
    let (name, sub) = matches.subcommand().expect("clap requires a subcommand");
    let manifest = Manifest::from_matches(name, sub);
    commands::execute(&cli.command, manifest).map(|_| ())
}
