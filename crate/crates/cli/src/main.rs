//! `cursive-cut`: segment cursive word images into characters.
//!
//! Exit status is 0 on success, 1 when a command fails on its data and 2 on
//! a usage error (bad flags, bad configuration, missing model).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::{EvalArgs, ServeArgs, DEFAULT_SYNTH_SEED};
use crate::config::CliConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "cursive-cut", version, about = "Non-linear character segmentation of cursive words")]
struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true, env = "CURSIVE_CUT_CONFIG")]
    config: Option<PathBuf>,
    /// Output format for stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for training and corpus synthesis.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Over-segmentation divisor.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Standard character width in pixels (estimated per word if absent).
    #[arg(long, global = true)]
    char_width: Option<usize>,
    /// Boundary matching tolerance in pixels.
    #[arg(long, global = true)]
    tolerance: Option<usize>,
    /// Worker threads for evaluation.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Port for `serve`.
    #[arg(long, global = true)]
    port: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Binarize, deslant and thin a word image.
    Preprocess { input: PathBuf, output: PathBuf },
    /// Print the heuristic cut list of a word image as JSON.
    Cuts {
        input: PathBuf,
        /// Write the cut list here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the MLP/RBF ensemble from a training-set file.
    Train {
        training: PathBuf,
        /// Where to write the model.
        #[arg(long, short)]
        out: PathBuf,
        /// Held-out training-set file to report fit on.
        #[arg(long)]
        validation: Option<PathBuf>,
    },
    /// Run the full pipeline and write one image per character.
    Segment {
        input: PathBuf,
        outdir: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Score the pipeline on a corpus with ground truth.
    Eval {
        corpus: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Score the heuristic boundaries without a model.
        #[arg(long, conflicts_with = "model")]
        heuristics_only: bool,
        /// Corpus whose rate fills the train column.
        #[arg(long)]
        train_corpus: Option<PathBuf>,
        /// Also write the report as JSON to this file.
        #[arg(long)]
        report_json: Option<PathBuf>,
    },
    /// Generate a synthetic corpus with exact boundaries.
    Synth {
        outdir: PathBuf,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Auto-label the candidate cuts and write a training set here.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Draw cuts and paths over a word image.
    Render {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        cuts: PathBuf,
        #[arg(long)]
        paths: Option<PathBuf>,
    },
    /// Start the labeling service on 127.0.0.1.
    Serve {
        corpus: PathBuf,
        /// Label log (default: labels.jsonl in the corpus directory).
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Training-set export target (default: training.jsonl in the corpus).
        #[arg(long)]
        export: Option<PathBuf>,
        /// Directory of UI assets served at `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

pub enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<cursive_cut::Error> for Failure {
    fn from(e: cursive_cut::Error) -> Self {
        match e {
            cursive_cut::Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            e => Failure::Runtime(e.into()),
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<CliConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => CliConfig::load(path).map_err(|e| Failure::Usage(format!("{e:#}")))?,
        None => CliConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.train.rng_seed = seed;
    }
    if let Some(n) = cli.n {
        cfg.pipeline.seg.n = n;
    }
    if let Some(w) = cli.char_width {
        cfg.pipeline.seg.char_width = Some(w);
    }
    if let Some(t) = cli.tolerance {
        cfg.tolerance = t;
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = Some(j);
    }
    if let Some(p) = cli.port {
        cfg.port = p;
    }
    cfg.pipeline.validate()?;
    cfg.train.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = resolve_config(&cli)?;
    if let Some(jobs) = cfg.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(anyhow::Error::from)?;
    }
    let format = cli.format;
    match cli.command {
        Command::Preprocess { input, output } => commands::preprocess_cmd(&input, &output, format),
        Command::Cuts { input, out } => commands::cuts_cmd(&input, out.as_deref(), &cfg, format),
        Command::Train { training, out, validation } => {
            commands::train_cmd(&training, &out, validation.as_deref(), &cfg, format)
        }
        Command::Segment { input, outdir, model } => {
            let model = model.or_else(|| cfg.model.clone());
            commands::segment_cmd(&input, model.as_deref(), &outdir, &cfg, format)
        }
        Command::Eval {
            corpus,
            model,
            heuristics_only,
            train_corpus,
            report_json,
        } => {
            let model = model.or_else(|| cfg.model.clone());
            let args = EvalArgs {
                corpus: &corpus,
                model: model.as_deref(),
                heuristics_only,
                train_corpus: train_corpus.as_deref(),
                report_json: report_json.as_deref(),
            };
            commands::eval_cmd(args, &cfg, format)
        }
        Command::Synth { outdir, count, export } => {
            if count == 0 {
                return Err(Failure::Usage("--count must be at least 1".into()));
            }
            let seed = cli.seed.unwrap_or(DEFAULT_SYNTH_SEED);
            commands::synth_cmd(&outdir, count, seed, export.as_deref(), &cfg, format)
        }
        Command::Render {
            input,
            output,
            cuts,
            paths,
        } => commands::render_cmd(&input, &cuts, paths.as_deref(), &output, format),
        Command::Serve {
            corpus,
            labels,
            export,
            static_dir,
        } => commands::serve_cmd(
            ServeArgs {
                corpus,
                labels,
                export,
                static_dir,
            },
            &cfg,
            format,
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
