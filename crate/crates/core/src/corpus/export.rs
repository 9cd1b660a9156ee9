use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::WordRecord;
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::neural::Sample;
use crate::pipeline::{analyze_word, PipelineConfig};
use crate::segmenter::CutStatus;

/// One labeled cut with its features, as stored in a training JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRow {
    pub word_id: String,
    /// Input-image column.
    pub column: usize,
    pub features: FeatureVector,
    pub label: u8,
}

impl TrainingRow {
    pub fn sample(&self) -> Sample {
        Sample::new(self.features.0.clone(), f64::from(self.label))
    }
}

/// Feature rows for every labeled cut, sorted by word id then column.
/// Unlabeled cuts are skipped; a label on a column that is not a candidate
/// boundary is an error.
pub fn export_training_set(records: &[WordRecord], cfg: &PipelineConfig) -> Result<Vec<TrainingRow>> {
    let mut rows = Vec::new();
    for rec in records {
        if rec.labeled().next().is_none() {
            continue;
        }
        let analysis = analyze_word(&rec.load_image()?, cfg)?;
        for (column, label) in rec.labeled() {
            let cut = analysis
                .cut_at_source(column)
                .filter(|c| c.status == CutStatus::HeuristicValid)
                .ok_or_else(|| {
                    Error::Corpus(format!("word {}: column {column} is not a candidate cut", rec.word_id))
                })?;
            rows.push(TrainingRow {
                word_id: rec.word_id.clone(),
                column,
                features: analysis.features(cut, &cfg.features),
                label,
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::NoLabels);
    }
    rows.sort_by(|a, b| (a.word_id.as_str(), a.column).cmp(&(b.word_id.as_str(), b.column)));
    Ok(rows)
}

pub fn write_training_set(path: impl AsRef<Path>, rows: &[TrainingRow]) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for row in rows {
        serde_json::to_writer(&mut out, row)?;
        out.push(b'\n');
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&out).map_err(|e| Error::io(path, e))
}

pub fn read_training_set(path: impl AsRef<Path>) -> Result<Vec<TrainingRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let row: TrainingRow =
                serde_json::from_str(l).map_err(|e| Error::Corpus(format!("{}:{}: {e}", path.display(), i + 1)))?;
            if row.label > 1 {
                return Err(Error::Corpus(format!("{}:{}: label must be 0 or 1", path.display(), i + 1)));
            }
            Ok(row)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{synthesize_corpus, auto_label, GlyphKind, CutLabel, LabeledCut};

    fn labeled_corpus(dir: &Path) -> Vec<WordRecord> {
        let mut corpus = synthesize_corpus(3, 4, &GlyphKind::ALL).unwrap();
        corpus.write_to(dir).unwrap();
        let mut recs = corpus.records();
        auto_label(&mut recs, &PipelineConfig::default(), 3).unwrap();
        recs
    }

    #[test]
    fn rows_sorted_and_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let recs = labeled_corpus(dir.path());
        let a = export_training_set(&recs, &PipelineConfig::default()).unwrap();
        let mut rev = recs.clone();
        rev.reverse();
        let b = export_training_set(&rev, &PipelineConfig::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| (w[0].word_id.as_str(), w[0].column) < (w[1].word_id.as_str(), w[1].column)));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let recs = labeled_corpus(dir.path());
        let rows = export_training_set(&recs, &PipelineConfig::default()).unwrap();
        let path = dir.path().join("train.jsonl");
        write_training_set(&path, &rows).unwrap();
        assert_eq!(read_training_set(&path).unwrap(), rows);
    }

    #[test]
    fn no_labels_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut recs = labeled_corpus(dir.path());
        for r in &mut recs {
            r.cuts.clear();
        }
        assert!(matches!(export_training_set(&recs, &PipelineConfig::default()), Err(Error::NoLabels)));
    }

    #[test]
    fn label_off_candidate_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut recs = labeled_corpus(dir.path());
        recs[0].cuts = vec![LabeledCut {
            column: 0,
            label: CutLabel::Valid,
        }];
        assert!(matches!(
            export_training_set(&recs[..1], &PipelineConfig::default()),
            Err(Error::Corpus(_))
        ));
    }
}
