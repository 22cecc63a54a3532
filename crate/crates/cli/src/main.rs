mod commands;
mod inputs;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tsaug::Error;

/// Deterministic time-series augmentation for UCR-format datasets.
#[derive(Debug, Parser)]
#[command(name = "tsaug", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Master seed; fully determines all random output.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Parameter override, repeatable (e.g. --set jitter_sigma=0.05).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Output directory (defaults to the input's directory, or the current one).
    #[arg(long, env = "TSAUG_OUT_DIR")]
    out_dir: Option<PathBuf>,

    /// Use the files as they are instead of min-max scaling and zero-padding them.
    #[arg(long)]
    raw: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write `<name>_<method>_x<multiplier>_TRAIN.tsv` with the generated patterns.
    Augment {
        #[arg(long)]
        method: String,
        #[arg(long, default_value_t = 4)]
        multiplier: usize,
        /// Worker threads (defaults to all cores); output does not depend on it.
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        common: Common,
        input: PathBuf,
    },
    /// Draw originals against generated patterns, or a PCA scatter, as SVG plus CSV.
    Plot {
        #[arg(long, value_enum, default_value_t = PlotKind::Overlay)]
        kind: PlotKind,
        /// Methods to draw (comma-separated or repeated).
        #[arg(long = "method", value_delimiter = ',', required = true)]
        methods: Vec<String>,
        /// Pattern shown in overlay plots.
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Generated patterns per original in PCA plots.
        #[arg(long, default_value_t = 4)]
        multiplier: usize,
        #[command(flatten)]
        common: Common,
        input: PathBuf,
    },
    /// Time one single-threaded augmentation pass per method and dataset.
    Bench {
        /// Methods to time (comma-separated); defaults to all twelve.
        #[arg(long = "method", value_delimiter = ',')]
        methods: Vec<String>,
        #[arg(long, default_value_t = 1)]
        multiplier: usize,
        /// CSV destination (defaults to `bench.csv` in the output directory).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        /// TRAIN files or directories searched for `*_TRAIN.tsv`.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Report size, length, dataset variance and intra-class variance per dataset.
    Analyze {
        /// CSV destination (defaults to `properties.csv` in the output directory).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Correlate accuracy changes (`dataset,method,delta_acc` CSV) with dataset properties.
    Correlate {
        #[arg(long)]
        delta_acc: PathBuf,
        /// CSV destination (defaults to `correlations.csv` in the output directory).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlotKind {
    Overlay,
    Pca,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::Format(_) | Error::Io(_) => 2,
        Error::MissingRows(_) => 4,
        Error::Argument(_) | Error::Constraint(_) | Error::Dimension(_) | Error::Domain(_) => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
