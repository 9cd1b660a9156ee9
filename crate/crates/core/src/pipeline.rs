//! One word through the whole chain.
//!
//! Cut columns are computed on the preprocessed (slant-corrected, cropped)
//! skeleton. Columns that leave this module are columns of the input image,
//! mapped back through the slant correction at the core-zone center row.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::{extract_features, FeatureConfig, FeatureVector};
use crate::imgproc::{preprocess, GrayImage, SkeletonImage, SlantCorrection};
use crate::neural::{CutDecision, EnsembleModel};
use crate::pathtrace::{non_crossing, segment_characters, trace_path, CharacterSegment, SegmentationPath, DEFAULT_LAMBDA};
use crate::segmenter::{detect_core_zone, run_heuristics, CandidateCut, CoreZone, CutStatus, HeuristicCuts, SegParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seg: SegParams,
    pub features: FeatureConfig,
    /// Deviation weight of the path cost.
    pub lambda: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seg: SegParams::default(),
            features: FeatureConfig::default(),
            lambda: DEFAULT_LAMBDA,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.seg.validate()?;
        self.features.validate()?;
        if !(self.lambda >= 0.0) {
            return Err(crate::Error::InvalidParameter("lambda must be >= 0".into()));
        }
        Ok(())
    }
}

/// Preprocessed word with its heuristic cuts.
#[derive(Debug, Clone)]
pub struct WordAnalysis {
    pub skeleton: SkeletonImage,
    pub correction: SlantCorrection,
    /// `None` when the word has no ink.
    pub zone: Option<CoreZone>,
    pub heuristics: HeuristicCuts,
    source_width: usize,
}

pub fn analyze_word(gray: &GrayImage, cfg: &PipelineConfig) -> Result<WordAnalysis> {
    cfg.validate()?;
    let (skeleton, correction) = preprocess(gray);
    let heuristics = run_heuristics(&skeleton, &cfg.seg)?;
    let zone = detect_core_zone(&skeleton, cfg.seg.core_fraction).ok();
    Ok(WordAnalysis {
        skeleton,
        correction,
        zone,
        heuristics,
        source_width: gray.width(),
    })
}

impl WordAnalysis {
    fn reference_row(&self) -> usize {
        match self.zone {
            Some(z) => z.center_row(),
            None => self.skeleton.height() / 2,
        }
    }

    /// Input-image column of a preprocessed-frame column.
    pub fn source_column(&self, column: usize) -> usize {
        let src = self.correction.source_column(column, self.reference_row());
        src.clamp(0, self.source_width as i64 - 1) as usize
    }

    /// The cut whose source column is `source`, if any.
    pub fn cut_at_source(&self, source: usize) -> Option<&CandidateCut> {
        self.heuristics.cuts.iter().find(|c| self.source_column(c.column) == source)
    }

    /// Cut list in input-image columns.
    pub fn source_cuts(&self) -> Vec<CandidateCut> {
        self.heuristics
            .cuts
            .iter()
            .map(|c| CandidateCut {
                column: self.source_column(c.column),
                ..*c
            })
            .collect()
    }

    /// Cuts a labeler (or the ensemble) decides on.
    pub fn candidates(&self) -> impl Iterator<Item = &CandidateCut> {
        self.heuristics
            .cuts
            .iter()
            .filter(|c| matches!(c.status, CutStatus::HeuristicValid | CutStatus::NnValid | CutStatus::NnInvalid))
    }

    pub fn features(&self, cut: &CandidateCut, cfg: &FeatureConfig) -> FeatureVector {
        extract_features(&self.skeleton, cut, &self.heuristics.cuts, cfg, self.heuristics.char_width)
    }

    /// Votes every heuristic boundary valid or invalid.
    pub fn validate(&mut self, model: &EnsembleModel, cfg: &FeatureConfig) -> Result<()> {
        let decisions = self
            .heuristics
            .cuts
            .iter()
            .map(|c| {
                if c.status == CutStatus::HeuristicValid {
                    model.classify(self.features(c, cfg).as_slice()).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        for (cut, decision) in self.heuristics.cuts.iter_mut().zip(decisions) {
            match decision {
                Some(CutDecision::Valid) => cut.advance(CutStatus::NnValid),
                Some(CutDecision::Invalid) => cut.advance(CutStatus::NnInvalid),
                None => {}
            }
        }
        Ok(())
    }

    /// Cuts that survived every stage run so far, in preprocessed columns.
    pub fn accepted(&self) -> Vec<CandidateCut> {
        self.heuristics.cuts.iter().filter(|c| c.status.is_accepted()).copied().collect()
    }

    pub fn accepted_source_columns(&self) -> Vec<usize> {
        self.accepted().iter().map(|c| self.source_column(c.column)).collect()
    }

    pub fn trace_paths(&self, lambda: f64) -> Vec<SegmentationPath> {
        let Some(zone) = self.zone else {
            return Vec::new();
        };
        self.accepted()
            .iter()
            .map(|c| trace_path(&self.skeleton, c, &zone, lambda))
            .collect()
    }

    /// Traced paths reduced to a non-crossing set, plus the seed columns
    /// (preprocessed frame) of the paths left out.
    pub fn boundary_paths(&self, lambda: f64) -> (Vec<SegmentationPath>, Vec<usize>) {
        non_crossing(self.trace_paths(lambda))
    }

    pub fn segments(&self, paths: &[SegmentationPath]) -> Result<Vec<CharacterSegment>> {
        segment_characters(self.skeleton.as_binary(), paths)
    }

    /// Paths mapped to input-image columns, one per input row. Rows outside
    /// the cropped area continue the nearest traced row.
    pub fn source_paths(&self, paths: &[SegmentationPath], source_height: usize) -> Vec<SegmentationPath> {
        paths
            .iter()
            .map(|p| {
                let columns = (0..source_height)
                    .map(|y| {
                        let local = (y as i64 - self.correction.source_row(0) as i64)
                            .clamp(0, self.skeleton.height() as i64 - 1) as usize;
                        let x = self.correction.source_column(p.columns[local], local);
                        x.clamp(0, self.source_width as i64 - 1) as usize
                    })
                    .collect();
                SegmentationPath {
                    seed_column: self.source_column(p.seed_column),
                    columns,
                }
            })
            .collect()
    }
}
