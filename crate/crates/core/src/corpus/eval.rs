use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::WordRecord;
use crate::error::Result;
use crate::neural::EnsembleModel;
use crate::pipeline::{analyze_word, PipelineConfig};

/// Columns a predicted boundary may sit from the ground truth and still count.
pub const DEFAULT_TOLERANCE: usize = 3;

/// Boundary match for one word.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegRate {
    /// Percentage of ground-truth boundaries matched. A word without ground
    /// truth scores 100.
    pub rate: f64,
    pub hits: usize,
    /// Predictions left unmatched.
    pub over_seg: usize,
    /// Ground-truth boundaries left unmatched.
    pub missed: usize,
}

/// One-to-one greedy matching: ground-truth boundaries in increasing order
/// each take the nearest unmatched prediction within `tolerance`, ties to
/// the smaller column.
pub fn seg_rate(predicted: &[usize], gt: &[usize], tolerance: usize) -> SegRate {
    let mut preds = predicted.to_vec();
    preds.sort_unstable();
    let mut gts = gt.to_vec();
    gts.sort_unstable();
    let mut used = vec![false; preds.len()];
    let mut hits = 0;
    for &g in &gts {
        let best = preds
            .iter()
            .enumerate()
            .filter(|&(i, &p)| !used[i] && p.abs_diff(g) <= tolerance)
            .min_by_key(|&(_, &p)| (p.abs_diff(g), p))
            .map(|(i, _)| i);
        if let Some(i) = best {
            used[i] = true;
            hits += 1;
        }
    }
    let rate = if gts.is_empty() {
        100.0
    } else {
        100.0 * hits as f64 / gts.len() as f64
    };
    SegRate {
        rate,
        hits,
        over_seg: preds.len() - hits,
        missed: gts.len() - hits,
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Validator<'a> {
    /// Take every heuristic boundary as final.
    Heuristics,
    Ensemble(&'a EnsembleModel),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordEval {
    pub word_id: String,
    pub predicted: Vec<usize>,
    pub gt: Vec<usize>,
    #[serde(flatten)]
    pub score: SegRate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub word_count: usize,
    pub total_points: usize,
    /// Rate on the training words, when the caller supplies it.
    pub train_rate: Option<f64>,
    /// Unweighted mean of per-word rates.
    pub test_rate: f64,
    pub over_seg: usize,
    pub missed: usize,
    pub per_word: Vec<WordEval>,
}

impl EvalReport {
    /// Table with columns words, points, train %, test %.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let train = self.train_rate.map_or_else(|| "-".to_string(), |r| format!("{r:.2}"));
        writeln!(s, "{:>8} {:>8} {:>9} {:>9}", "words", "points", "train %", "test %").unwrap();
        writeln!(
            s,
            "{:>8} {:>8} {:>9} {:>9.2}",
            self.word_count, self.total_points, train, self.test_rate
        )
        .unwrap();
        writeln!(s, "over-segmentation: {}  missed: {}", self.over_seg, self.missed).unwrap();
        s
    }
}

fn eval_word(rec: &WordRecord, cfg: &PipelineConfig, validator: Validator, tolerance: usize) -> Result<WordEval> {
    let gray = rec.load_image()?;
    rec.check_gt(gray.width())?;
    let mut analysis = analyze_word(&gray, cfg)?;
    if let Validator::Ensemble(model) = validator {
        analysis.validate(model, &cfg.features)?;
    }
    let mut predicted = analysis.accepted_source_columns();
    predicted.sort_unstable();
    predicted.dedup();
    Ok(WordEval {
        word_id: rec.word_id.clone(),
        score: seg_rate(&predicted, &rec.gt_boundaries, tolerance),
        predicted,
        gt: rec.gt_boundaries.clone(),
    })
}

/// Runs every word through the pipeline (in parallel) and scores the
/// accepted boundaries against ground truth.
pub fn evaluate_pipeline(
    records: &[WordRecord],
    cfg: &PipelineConfig,
    validator: Validator,
    tolerance: usize,
) -> Result<EvalReport> {
    cfg.validate()?;
    let per_word = records
        .par_iter()
        .map(|r| eval_word(r, cfg, validator, tolerance))
        .collect::<Result<Vec<_>>>()?;
    let test_rate = if per_word.is_empty() {
        0.0
    } else {
        per_word.iter().map(|w| w.score.rate).sum::<f64>() / per_word.len() as f64
    };
    Ok(EvalReport {
        word_count: per_word.len(),
        total_points: per_word.iter().map(|w| w.gt.len()).sum(),
        train_rate: None,
        test_rate,
        over_seg: per_word.iter().map(|w| w.score.over_seg).sum(),
        missed: per_word.iter().map(|w| w.score.missed).sum(),
        per_word,
    })
}
