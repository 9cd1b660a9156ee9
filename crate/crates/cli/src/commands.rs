use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use cursive_cut::corpus::{
    auto_label, evaluate_pipeline, export_training_set, load_corpus, read_training_set, synthesize_corpus,
    write_manifest, write_training_set, EvalReport, GlyphKind, Validator,
};
use cursive_cut::imgproc::{load_image, otsu_threshold, preprocess, save_binary_pgm};
use cursive_cut::neural::{load_model, save_model, train_ensemble, EnsembleModel, FitMetrics, Sample};
use cursive_cut::pathtrace::{render_overlay, SegmentationPath};
use cursive_cut::pipeline::analyze_word;
use cursive_cut::segmenter::CandidateCut;
use cursive_cut_annotate::{AppState, ServiceConfig};
use serde::{Deserialize, Serialize};

use crate::config::CliConfig;
use crate::{Failure, Format};

pub const DEFAULT_SYNTH_SEED: u64 = 42;

/// Cut list in input-image columns, as written by `cuts` and `segment` and
/// read by `render`.
#[derive(Debug, Serialize, Deserialize)]
pub struct CutList {
    pub width: usize,
    pub height: usize,
    pub char_width: usize,
    pub slant_deg: i32,
    pub cuts: Vec<CandidateCut>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CutListFile {
    Full(CutList),
    Bare(Vec<CandidateCut>),
}

fn print<T: Serialize>(format: Format, text: impl FnOnce() -> String, value: &T) -> Result<(), Failure> {
    match format {
        Format::Text => print!("{}", text()),
        Format::Json => println!("{}", serde_json::to_string_pretty(value).map_err(anyhow::Error::from)?),
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_model(path: Option<&Path>) -> Result<EnsembleModel, Failure> {
    let path = path.ok_or_else(|| Failure::Usage("model not found: pass --model <model.json>".into()))?;
    if !path.is_file() {
        return Err(Failure::Usage(format!("model not found: {}", path.display())));
    }
    Ok(load_model(path)?)
}

fn word_id(input: &Path) -> String {
    input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "word".into())
}

fn cut_list(input: &Path, cfg: &CliConfig) -> Result<CutList, Failure> {
    let gray = load_image(input)?;
    let a = analyze_word(&gray, &cfg.pipeline)?;
    Ok(CutList {
        width: gray.width(),
        height: gray.height(),
        char_width: a.heuristics.char_width,
        slant_deg: a.correction.angle_deg,
        cuts: a.source_cuts(),
    })
}

pub fn preprocess_cmd(input: &Path, output: &Path, format: Format) -> Result<(), Failure> {
    #[derive(Serialize)]
    struct Out<'a> {
        output: &'a Path,
        threshold: u8,
        slant_deg: i32,
        width: usize,
        height: usize,
    }
    let gray = load_image(input)?;
    let (threshold, _) = otsu_threshold(&gray);
    let (skeleton, correction) = preprocess(&gray);
    save_binary_pgm(skeleton.as_binary(), output)?;
    let out = Out {
        output,
        threshold,
        slant_deg: correction.angle_deg,
        width: skeleton.width(),
        height: skeleton.height(),
    };
    print(
        format,
        || {
            format!(
                "threshold {}  slant {} deg  skeleton {}x{} -> {}\n",
                out.threshold,
                out.slant_deg,
                out.width,
                out.height,
                output.display()
            )
        },
        &out,
    )
}

pub fn cuts_cmd(input: &Path, out: Option<&Path>, cfg: &CliConfig, format: Format) -> Result<(), Failure> {
    let list = cut_list(input, cfg)?;
    match out {
        None => {
            println!("{}", serde_json::to_string_pretty(&list).map_err(anyhow::Error::from)?);
            Ok(())
        }
        Some(path) => {
            write_json(path, &list)?;
            let rejected = list.cuts.iter().filter(|c| c.status.is_rejected()).count();
            print(
                format,
                || format!("{} cuts ({} rejected) -> {}\n", list.cuts.len(), rejected, path.display()),
                &serde_json::json!({ "output": path, "cuts": list.cuts.len(), "rejected": rejected }),
            )
        }
    }
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    model: &'a Path,
    rows: usize,
    epochs: usize,
    mlp_final_mse: Option<f64>,
    rbf_mse: Option<f64>,
    train: Option<FitMetrics>,
    held_out: Option<FitMetrics>,
}

fn metric_line(name: &str, m: &FitMetrics) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
    format!("{name:<9} RMSE {:.4}  R {}  SI {}\n", m.rmse, opt(m.r), opt(m.si))
}

pub fn train_cmd(
    training: &Path,
    out: &Path,
    validation: Option<&Path>,
    cfg: &CliConfig,
    format: Format,
) -> Result<(), Failure> {
    let samples: Vec<Sample> = read_training_set(training)?.iter().map(|r| r.sample()).collect();
    let held: Option<Vec<Sample>> = match validation {
        Some(p) => Some(read_training_set(p)?.iter().map(|r| r.sample()).collect()),
        None => None,
    };
    let mut train_cfg = cfg.train;
    if train_cfg.rbf_centers > samples.len() {
        log::warn!(
            "only {} training rows; using that many RBF centers instead of {}",
            samples.len(),
            train_cfg.rbf_centers
        );
        train_cfg.rbf_centers = samples.len();
    }
    let (model, log) = train_ensemble(&samples, held.as_deref(), &train_cfg)?;
    save_model(&model, out)?;
    let summary = TrainSummary {
        model: out,
        rows: samples.len(),
        epochs: log.mlp_mse.len(),
        mlp_final_mse: log.mlp_mse.last().copied(),
        rbf_mse: log.rbf_mse.last().copied(),
        train: log.train,
        held_out: log.held_out,
    };
    print(
        format,
        || {
            let mut s = format!("{} rows, {} MLP epochs\n", summary.rows, summary.epochs);
            if let Some(m) = &summary.train {
                s += &metric_line("train", m);
            }
            if let Some(m) = &summary.held_out {
                s += &metric_line("held-out", m);
            }
            s + &format!("model written to {}\n", out.display())
        },
        &summary,
    )
}

pub fn segment_cmd(
    input: &Path,
    model: Option<&Path>,
    outdir: &Path,
    cfg: &CliConfig,
    format: Format,
) -> Result<(), Failure> {
    let model = read_model(model)?;
    let gray = load_image(input)?;
    let mut a = analyze_word(&gray, &cfg.pipeline)?;
    a.validate(&model, &cfg.pipeline.features)?;
    let (paths, dropped) = a.boundary_paths(cfg.pipeline.lambda);
    let segments = a.segments(&paths)?;

    fs::create_dir_all(outdir).with_context(|| format!("creating {}", outdir.display()))?;
    let id = word_id(input);
    let mut characters = Vec::with_capacity(segments.len());
    for seg in &segments {
        let path = outdir.join(format!("word_{id}_char_{}.pgm", seg.index));
        save_binary_pgm(&seg.image, &path)?;
        characters.push(path);
    }
    let paths_file = outdir.join(format!("word_{id}_paths.json"));
    write_json(&paths_file, &a.source_paths(&paths, gray.height()))?;
    let cuts_file = outdir.join(format!("word_{id}_cuts.json"));
    write_json(
        &cuts_file,
        &CutList {
            width: gray.width(),
            height: gray.height(),
            char_width: a.heuristics.char_width,
            slant_deg: a.correction.angle_deg,
            cuts: a.source_cuts(),
        },
    )?;

    let boundaries: Vec<usize> = paths.iter().map(|p| a.source_column(p.seed_column)).collect();
    let merged: Vec<usize> = dropped.iter().map(|&c| a.source_column(c)).collect();
    print(
        format,
        || {
            format!(
                "{} characters, boundaries at {:?}\nwritten to {}\n",
                characters.len(),
                boundaries,
                outdir.display()
            )
        },
        &serde_json::json!({
            "word_id": id,
            "boundaries": boundaries,
            "merged_boundaries": merged,
            "characters": characters,
            "paths": paths_file,
            "cuts": cuts_file,
        }),
    )
}

pub struct EvalArgs<'a> {
    pub corpus: &'a Path,
    pub model: Option<&'a Path>,
    pub heuristics_only: bool,
    pub train_corpus: Option<&'a Path>,
    pub report_json: Option<&'a Path>,
}

pub fn eval_cmd(args: EvalArgs, cfg: &CliConfig, format: Format) -> Result<(), Failure> {
    let model = if args.heuristics_only {
        None
    } else {
        Some(read_model(args.model)?)
    };
    let validator = match &model {
        Some(m) => Validator::Ensemble(m),
        None => Validator::Heuristics,
    };
    let records = load_corpus(args.corpus)?;
    let mut report: EvalReport = evaluate_pipeline(&records, &cfg.pipeline, validator, cfg.tolerance)?;
    if let Some(dir) = args.train_corpus {
        let train = evaluate_pipeline(&load_corpus(dir)?, &cfg.pipeline, validator, cfg.tolerance)?;
        report.train_rate = Some(train.test_rate);
    }
    if let Some(path) = args.report_json {
        write_json(path, &report)?;
    }
    print(format, || report.to_table(), &report)
}

pub fn synth_cmd(
    outdir: &Path,
    count: usize,
    seed: u64,
    export: Option<&Path>,
    cfg: &CliConfig,
    format: Format,
) -> Result<(), Failure> {
    let mut corpus = synthesize_corpus(seed, count, &GlyphKind::ALL)?;
    corpus.write_to(outdir)?;
    let mut records = corpus.records();
    let boundaries: usize = records.iter().map(|r| r.gt_boundaries.len()).sum();
    let mut rows = None;
    if let Some(path) = export {
        auto_label(&mut records, &cfg.pipeline, cfg.tolerance)?;
        write_manifest(outdir, &records)?;
        let training = export_training_set(&records, &cfg.pipeline)?;
        write_training_set(path, &training)?;
        rows = Some(training.len());
    }
    print(
        format,
        || {
            let mut s = format!("{count} words, {boundaries} boundaries -> {}\n", outdir.display());
            if let (Some(n), Some(p)) = (rows, export) {
                s += &format!("{n} training rows -> {}\n", p.display());
            }
            s
        },
        &serde_json::json!({
            "dir": outdir,
            "seed": seed,
            "words": count,
            "boundaries": boundaries,
            "training_rows": rows,
            "training_file": export,
        }),
    )
}

pub fn render_cmd(
    input: &Path,
    cuts: &Path,
    paths: Option<&Path>,
    output: &Path,
    format: Format,
) -> Result<(), Failure> {
    let gray = load_image(input)?;
    let text = fs::read_to_string(cuts).with_context(|| format!("reading {}", cuts.display()))?;
    let cuts: Vec<CandidateCut> = match serde_json::from_str(&text).with_context(|| format!("parsing {}", cuts.display()))? {
        CutListFile::Full(l) => l.cuts,
        CutListFile::Bare(v) => v,
    };
    let paths: Vec<SegmentationPath> = match paths {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => Vec::new(),
    };
    render_overlay(&gray, &cuts, &paths, output)?;
    print(
        format,
        || format!("{} cuts, {} paths -> {}\n", cuts.len(), paths.len(), output.display()),
        &serde_json::json!({ "output": output, "cuts": cuts.len(), "paths": paths.len() }),
    )
}

pub struct ServeArgs {
    pub corpus: PathBuf,
    pub labels: Option<PathBuf>,
    pub export: Option<PathBuf>,
    pub static_dir: Option<PathBuf>,
}

pub fn serve_cmd(args: ServeArgs, cfg: &CliConfig, format: Format) -> Result<(), Failure> {
    let mut service = ServiceConfig::for_corpus(&args.corpus);
    service.pipeline = cfg.pipeline;
    if let Some(p) = args.labels.or_else(|| cfg.labels.clone()) {
        service.labels_path = p;
    }
    if let Some(p) = args.export {
        service.export_path = p;
    }
    service.static_dir = args.static_dir.or_else(|| cfg.static_dir.clone());

    let runtime = tokio::runtime::Runtime::new().context("starting async runtime")?;
    runtime.block_on(async {
        let state = std::sync::Arc::new(AppState::load(service).map_err(anyhow::Error::from)?);
        let listener = cursive_cut_annotate::bind(cfg.port).await.map_err(anyhow::Error::from)?;
        let addr = listener.local_addr().context("reading bound address")?;
        print(
            format,
            || format!("serving on http://{addr}\n"),
            &serde_json::json!({ "address": format!("http://{addr}") }),
        )?;
        use std::io::Write;
        std::io::stdout().flush().ok();
        cursive_cut_annotate::serve(listener, state, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(anyhow::Error::from)?;
        Ok(())
    })
}
