//! `accentor`: batch pipeline for East Slavic word stress detection:
//! dataset construction from CoNLL-U treebanks, annotation aggregation,
//! training, prediction, and experiment reproduction.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use accentor_core::corpus::StressRule;
use accentor_core::error::{
    AnnotationError, CheckpointError, CorpusError, EvalError, NeuroError, TrainError,
};
use accentor_core::{Head, Lang, OptimizerKind};

/// Command failure with its process exit code: 1 for validation/input
/// problems, 2 for internal numeric errors.
#[derive(Debug)]
pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    pub fn input(message: impl fmt::Display) -> CliError {
        CliError {
            message: message.to_string(),
            code: 1,
        }
    }

    pub fn numeric(message: impl fmt::Display) -> CliError {
        CliError {
            message: message.to_string(),
            code: 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::input(e)
    }
}

impl From<NeuroError> for CliError {
    fn from(e: NeuroError) -> CliError {
        match e {
            NeuroError::NonFinite { .. } | NeuroError::NonFiniteGradient { .. } => {
                CliError::numeric(e)
            }
            _ => CliError::input(e),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> CliError {
        match e {
            TrainError::Diverged { .. } => CliError::numeric(e),
            TrainError::Neuro(n) => CliError::from(n),
            _ => CliError::input(e),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> CliError {
        match e {
            EvalError::Train(t) => CliError::from(t),
            _ => CliError::input(e),
        }
    }
}

impl From<AnnotationError> for CliError {
    fn from(e: AnnotationError) -> CliError {
        CliError::input(e)
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> CliError {
        CliError::input(e)
    }
}

impl From<CheckpointError> for CliError {
    fn from(e: CheckpointError) -> CliError {
        CliError::input(e)
    }
}

/// `7:3`-style train:test ratio.
#[derive(Debug, Clone, Copy)]
pub struct SplitRatio(pub u32, pub u32);

impl FromStr for SplitRatio {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("expected train:test, e.g. 7:3, got `{s}`"))?;
        let a: u32 = a.trim().parse().map_err(|_| format!("bad ratio `{s}`"))?;
        let b: u32 = b.trim().parse().map_err(|_| format!("bad ratio `{s}`"))?;
        if a == 0 || b == 0 {
            return Err("ratio parts must be positive".into());
        }
        Ok(SplitRatio(a, b))
    }
}

/// Hyperparameters and the configuration file; every key of the file can
/// be overridden by the flag of the same name.
#[derive(Debug, Args)]
pub struct ModelFlags {
    /// Configuration file with `key = value` lines
    #[arg(long, global = false)]
    pub config: Option<PathBuf>,
    /// Output head: local or global
    #[arg(long)]
    pub head: Option<Head>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Learning rate
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long)]
    pub embedding_dim: Option<usize>,
    #[arg(long)]
    pub hidden_units: Option<usize>,
    /// Optimizer: sgd or adam
    #[arg(long)]
    pub optimizer: Option<OptimizerKind>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BuildDatasetArgs {
    /// CoNLL-U treebank file(s)
    #[arg(long = "treebank", value_name = "PATH", required = true)]
    pub treebanks: Vec<PathBuf>,
    /// Dataset language: be, ru or uk
    #[arg(long)]
    pub lang: Lang,
    /// Task-export output (JSON lines)
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    /// Task file produced by build-dataset
    #[arg(long)]
    pub tasks: PathBuf,
    /// Answer file: `{"task_id": ..., "answers": [a, b, c]}` per line
    #[arg(long)]
    pub answers: PathBuf,
    /// Dataset language: be, ru or uk
    #[arg(long)]
    pub lang: Lang,
    /// Accepted-dataset output (JSON lines)
    #[arg(long)]
    pub output: PathBuf,
    /// Optional rejection log (JSON lines)
    #[arg(long)]
    pub rejects: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Stress rule: first-vowel, last-vowel or penultimate-vowel
    #[arg(long)]
    pub rule: StressRule,
    /// Number of trigrams
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dataset language: be, ru or uk
    #[arg(long)]
    pub lang: Lang,
    /// Dataset output (JSON lines)
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    /// Labeled dataset(s); merged when repeated
    #[arg(long = "dataset", value_name = "PATH")]
    pub datasets: Vec<PathBuf>,
    /// Checkpoint output path
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Training-history JSON output
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// Fraction held out for best-epoch selection (0 disables)
    #[arg(long)]
    pub dev_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Configuration file with `key = value` lines
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model checkpoint
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Language of the input words: be, ru or uk
    #[arg(long)]
    pub lang: Option<Lang>,
    /// Input file (default: stdin). Lines hold `prev word next` with `_`
    /// for an absent neighbor, or a bare word.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file (default: stdout)
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    /// Per-language dataset as `tag=path`; repeatable
    #[arg(long = "dataset", value_name = "TAG=PATH")]
    pub datasets: Vec<String>,
    /// Train combos, semicolon-separated with commas inside,
    /// e.g. `be;ru;uk;ru,uk` (default: all seven subsets)
    #[arg(long)]
    pub combos: Option<String>,
    /// Training/testing repetitions
    #[arg(long)]
    pub runs: Option<usize>,
    /// Train:test ratio, e.g. 7:3
    #[arg(long)]
    pub split: Option<SplitRatio>,
    /// Worker threads for independent cells
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Text report output path
    #[arg(long)]
    pub report_text: Option<PathBuf>,
    /// JSON report output path
    #[arg(long)]
    pub report_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    /// Sampled parameter coordinates per check
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Number of seeds in the sweep
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    /// Half-step for the central differences. The default balances
    /// truncation against f64 roundoff at this loss scale; 1e-4 and below
    /// start measuring roundoff on near-zero gradient coordinates.
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract and filter word trigrams from CoNLL-U treebanks and write
    /// annotation tasks
    BuildDataset(BuildDatasetArgs),
    /// Aggregate annotator answers under the unanimity rule
    Annotate(AnnotateArgs),
    /// Generate a synthetic rule-based dataset
    Synth(SynthArgs),
    /// Train a stress-detection model
    Train(TrainArgs),
    /// Predict stress positions for trigram lines
    Predict(PredictArgs),
    /// Run the mono-/cross-lingual experiment grid
    Experiment(ExperimentArgs),
    /// Verify analytic gradients against finite differences
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Parser)]
#[command(
    name = "accentor",
    version,
    about = "Word stress detection for East Slavic languages"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    // usage problems are validation errors: exit 1, not clap's default 2
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::BuildDataset(args) => commands::build_dataset(args),
        Command::Annotate(args) => commands::annotate(args),
        Command::Synth(args) => commands::synth(args),
        Command::Train(args) => commands::train(args),
        Command::Predict(args) => commands::predict(args),
        Command::Experiment(args) => commands::experiment(args),
        Command::Gradcheck(args) => commands::gradcheck(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
