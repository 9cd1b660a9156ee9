//! Word corpora: manifest I/O, synthetic generation, evaluation and
//! training-set export.
//!
//! A corpus directory holds one PGM per word and a `manifest.jsonl` with
//! one [`WordRecord`] per line. Image paths in the manifest are relative to
//! the directory.

mod eval;
mod export;
mod synth;

pub use eval::{evaluate_pipeline, seg_rate, EvalReport, SegRate, Validator, WordEval, DEFAULT_TOLERANCE};
pub use export::{export_training_set, read_training_set, write_training_set, TrainingRow};
pub use synth::{auto_label, synthesize_corpus, GlyphKind, SynthWord, SynthesizedCorpus, GEN_CORE_BOTTOM, GEN_CORE_TOP, MIN_INK_WIDTH};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::{load_image, GrayImage};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutLabel {
    Valid,
    Invalid,
    Unlabeled,
}

impl CutLabel {
    pub fn bit(self) -> Option<u8> {
        match self {
            CutLabel::Valid => Some(1),
            CutLabel::Invalid => Some(0),
            CutLabel::Unlabeled => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledCut {
    pub column: usize,
    pub label: CutLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordRecord {
    pub word_id: String,
    #[serde(rename = "image")]
    pub image_path: PathBuf,
    #[serde(default)]
    pub gt_boundaries: Vec<usize>,
    #[serde(default)]
    pub cuts: Vec<LabeledCut>,
}

impl WordRecord {
    pub fn load_image(&self) -> Result<GrayImage> {
        load_image(&self.image_path)
    }

    pub fn labeled(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.cuts.iter().filter_map(|c| c.label.bit().map(|b| (c.column, b)))
    }

    /// Ground truth must be strictly increasing and interior.
    pub fn check_gt(&self, width: usize) -> Result<()> {
        let increasing = self.gt_boundaries.windows(2).all(|p| p[0] < p[1]);
        let interior = self.gt_boundaries.iter().all(|&b| b > 0 && b < width.saturating_sub(1));
        if !increasing || !interior {
            return Err(Error::Corpus(format!(
                "word {}: ground-truth boundaries must be strictly increasing and interior",
                self.word_id
            )));
        }
        Ok(())
    }
}

/// Reads `dir/manifest.jsonl`, resolving image paths against `dir`.
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Vec<WordRecord>> {
    let dir = dir.as_ref();
    let manifest = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest).map_err(|e| Error::io(&manifest, e))?;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut rec: WordRecord = serde_json::from_str(line)
            .map_err(|e| Error::Corpus(format!("{}:{}: {e}", manifest.display(), lineno + 1)))?;
        rec.image_path = dir.join(&rec.image_path);
        if !rec.image_path.is_file() {
            return Err(Error::MissingImage {
                word_id: rec.word_id,
                path: rec.image_path,
            });
        }
        records.push(rec);
    }
    Ok(records)
}

/// Writes `records` as a manifest in `dir`. Image paths are stored relative
/// to `dir` when they live inside it.
pub fn write_manifest(dir: impl AsRef<Path>, records: &[WordRecord]) -> Result<()> {
    let dir = dir.as_ref();
    let path = dir.join(MANIFEST_FILE);
    let mut out = Vec::new();
    for rec in records {
        let mut rec = rec.clone();
        if let Ok(rel) = rec.image_path.strip_prefix(dir) {
            rec.image_path = rel.to_path_buf();
        }
        serde_json::to_writer(&mut out, &rec)?;
        out.push(b'\n');
    }
    let mut file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    file.write_all(&out).map_err(|e| Error::io(&path, e))
}
