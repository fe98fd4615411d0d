mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, EXIT_USAGE};

/// Detect solar filaments in H-alpha full-disk images.
#[derive(Debug, Parser)]
#[command(name = "filament", version, about)]
pub struct Cli {
    /// JSON configuration; omitted fields take their defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// More log output; repeat for debug messages.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Remove bright patches, stretch and sharpen a raw frame.
    Preprocess(PreprocessArgs),
    /// Run the level-set segmentation on a preprocessed image.
    Segment(SegmentArgs),
    /// Segment with Otsu thresholding or k-means.
    Baseline(BaselineArgs),
    /// Drop connected components smaller than the area threshold.
    Postprocess(PostprocessArgs),
    /// Score a predicted mask against ground truth.
    Evaluate(EvaluateArgs),
    /// Merge metric reports into a ranked table.
    Compare(CompareArgs),
    /// Run the full detector on one image.
    Pipeline(PipelineArgs),
    /// Run the detector and both baselines over a directory of images.
    Experiment(ExperimentArgs),
    /// Generate a synthetic frame with known ground truth.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long = "in", value_name = "IMAGE")]
    pub input: PathBuf,
    /// Sharpened output image (.png or .pgm).
    #[arg(long, value_name = "IMAGE")]
    pub out: PathBuf,
    /// Also write the inpainted region.
    #[arg(long, value_name = "MASK")]
    pub save_mask: Option<PathBuf>,
    /// Also write the detected disk, usable as `segment --roi`.
    #[arg(long, value_name = "MASK")]
    pub save_disk: Option<PathBuf>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub percentile: Option<f64>,
    #[arg(long)]
    pub dilation_radius: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long = "in", value_name = "IMAGE")]
    pub input: PathBuf,
    /// Filament mask output.
    #[arg(long, value_name = "MASK")]
    pub out: PathBuf,
    /// Restrict the evolution to this region.
    #[arg(long, value_name = "MASK")]
    pub roi: Option<PathBuf>,
    /// Write the per-iteration energy trace as CSV.
    #[arg(long, value_name = "CSV")]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineMethod {
    Otsu,
    Kmeans,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long, value_enum)]
    pub method: BaselineMethod,
    #[arg(long = "in", value_name = "IMAGE")]
    pub input: PathBuf,
    #[arg(long, value_name = "MASK")]
    pub out: PathBuf,
    #[arg(long, value_name = "MASK")]
    pub roi: Option<PathBuf>,
    /// Cluster count for k-means.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PostprocessArgs {
    #[arg(long = "in", value_name = "MASK")]
    pub input: PathBuf,
    #[arg(long, value_name = "MASK")]
    pub out: PathBuf,
    #[arg(long)]
    pub min_area: Option<usize>,
    /// Write statistics of the kept components as JSON.
    #[arg(long, value_name = "JSON")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_name = "MASK")]
    pub pred: PathBuf,
    #[arg(long, value_name = "MASK")]
    pub truth: PathBuf,
    /// Score only inside this region.
    #[arg(long, value_name = "MASK")]
    pub roi: Option<PathBuf>,
    /// Write the report here as well as to stdout.
    #[arg(long, value_name = "JSON")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "acwe")]
    pub method: String,
    /// Defaults to the file stem of `--pred`.
    #[arg(long)]
    pub image_id: Option<String>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Report files, or directories whose `.json` files are read.
    #[arg(long, num_args = 1.., required = true, value_name = "PATH")]
    pub reports: Vec<PathBuf>,
    #[arg(long, value_name = "CSV")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "source")]
pub struct PipelineSource {
    #[arg(long = "in", value_name = "IMAGE")]
    pub input: Option<PathBuf>,
    /// Repeat the run recorded in a `run.json`.
    #[arg(long, value_name = "JSON")]
    pub from_manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub source: PipelineSource,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Keep inpainted, log, sharpened images, raw mask and energy trace.
    #[arg(long)]
    pub intermediates: bool,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_name = "DIR")]
    pub images: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub truth: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// JSON generator spec; omitted fields take their defaults.
    #[arg(long, value_name = "JSON")]
    pub spec: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Override the generator seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))?;
    }
    let config = commands::load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Preprocess(a) => commands::preprocess(a, config),
        Command::Segment(a) => commands::segment(a, config),
        Command::Baseline(a) => commands::baseline(a, config),
        Command::Postprocess(a) => commands::postprocess(a, config),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Compare(a) => commands::compare(a),
        Command::Pipeline(a) => commands::pipeline(a, config),
        Command::Experiment(a) => commands::experiment(a, config),
        Command::Synth(a) => commands::synth(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    init_logging(cli.verbose);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
