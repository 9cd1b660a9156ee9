//! Heuristic segmentation: uniform over-segmentation, loop rejection,
//! width-based merging and core-zone detection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::SkeletonImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutStatus {
    Proposed,
    LoopRejected,
    WidthMerged,
    HeuristicValid,
    NnValid,
    NnInvalid,
}

impl CutStatus {
    fn stage(self) -> u8 {
        match self {
            CutStatus::Proposed => 0,
            CutStatus::LoopRejected => 1,
            CutStatus::WidthMerged | CutStatus::HeuristicValid => 2,
            CutStatus::NnValid | CutStatus::NnInvalid => 3,
        }
    }

    /// Cuts that made it through the heuristics or the network vote.
    pub fn is_accepted(self) -> bool {
        matches!(self, CutStatus::HeuristicValid | CutStatus::NnValid)
    }

    pub fn is_rejected(self) -> bool {
        matches!(
            self,
            CutStatus::LoopRejected | CutStatus::WidthMerged | CutStatus::NnInvalid
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CandidateCut {
    pub column: usize,
    pub status: CutStatus,
    pub crossing_count: usize,
}

impl CandidateCut {
    pub fn proposed(column: usize) -> Self {
        CandidateCut {
            column,
            status: CutStatus::Proposed,
            crossing_count: 0,
        }
    }

    /// Moves the cut to a later pipeline stage.
    ///
    /// # Panics
    ///
    /// If `to` is not strictly later than the current status.
    pub fn advance(&mut self, to: CutStatus) {
        assert!(
            to.stage() > self.status.stage(),
            "cut at column {} cannot move from {:?} to {:?}",
            self.column,
            self.status,
            to
        );
        self.status = to;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegParams {
    /// Over-segmentation divisor: cuts are spaced `width / n` apart.
    pub n: usize,
    /// Standard character width in pixels; `None` estimates it per word.
    pub char_width: Option<usize>,
    /// Fraction of the peak row projection a row must reach to belong to
    /// the core zone.
    pub core_fraction: f64,
}

impl Default for SegParams {
    fn default() -> Self {
        SegParams {
            n: 20,
            char_width: None,
            core_fraction: 0.2,
        }
    }
}

impl SegParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("n must be >= 2, got {}", self.n)));
        }
        if !(self.core_fraction > 0.0 && self.core_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "core_fraction must be in (0, 1), got {}",
                self.core_fraction
            )));
        }
        if self.char_width == Some(0) {
            return Err(Error::InvalidParameter("char_width must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreZone {
    pub top_row: usize,
    pub bottom_row: usize,
}

impl CoreZone {
    pub fn center_row(&self) -> usize {
        (self.top_row + self.bottom_row) / 2
    }
}

/// Proposes interior cuts at `round(k * width / n)` for `k = 1..n`.
pub fn oversegment(img: &SkeletonImage, params: &SegParams) -> Result<Vec<CandidateCut>> {
    params.validate()?;
    let (w, n) = (img.width(), params.n);
    if w < n {
        return Err(Error::WidthBelowDivisor { width: w, n });
    }
    Ok((1..n)
        .map(|k| CandidateCut::proposed((2 * k * w + n) / (2 * n)))
        .collect())
}

/// Number of maximal vertical ink runs in `column`.
pub fn crossing_count(img: &SkeletonImage, column: usize) -> usize {
    let mut runs = 0;
    let mut inside = false;
    for y in 0..img.height() {
        let ink = img.get(column, y);
        if ink && !inside {
            runs += 1;
        }
        inside = ink;
    }
    runs
}

/// Records the crossing count on every cut and rejects those that cross
/// the ink more than once.
pub fn filter_loops(mut cuts: Vec<CandidateCut>, img: &SkeletonImage) -> Vec<CandidateCut> {
    for cut in &mut cuts {
        cut.crossing_count = crossing_count(img, cut.column);
        if cut.crossing_count > 1 {
            cut.advance(CutStatus::LoopRejected);
        }
    }
    cuts
}

fn surviving(cuts: &[CandidateCut]) -> impl Iterator<Item = &CandidateCut> {
    cuts.iter().filter(|c| !c.status.is_rejected())
}

/// Median gap between consecutive surviving cuts, or the explicit width in
/// `params`. With fewer than two survivors the image height is used
/// (square characters).
pub fn estimate_char_width(img: &SkeletonImage, cuts: &[CandidateCut], params: &SegParams) -> usize {
    if let Some(w) = params.char_width {
        return w;
    }
    let mut columns: Vec<usize> = surviving(cuts).map(|c| c.column).collect();
    columns.sort_unstable();
    if columns.len() < 2 {
        return img.height();
    }
    let mut gaps: Vec<usize> = columns.windows(2).map(|p| p[1] - p[0]).collect();
    gaps.sort_unstable();
    let mid = gaps.len() / 2;
    if gaps.len() % 2 == 1 {
        gaps[mid]
    } else {
        // mean of the two middle gaps, rounded half up
        (gaps[mid - 1] + gaps[mid]).div_ceil(2)
    }
}

/// Collapses runs of surviving cuts closer than `char_width` into a single
/// boundary at their rounded mean column.
///
/// Clusters are maximal: consecutive survivors in the same cluster are less
/// than `char_width` apart. A singleton cluster keeps its cut. Otherwise the
/// member sitting on the center (if any) becomes the boundary, the rest are
/// marked width-merged, and a new cut is inserted when the center falls
/// between members.
pub fn merge_by_width(cuts: Vec<CandidateCut>, char_width: usize, img: &SkeletonImage) -> Vec<CandidateCut> {
    let mut cuts = cuts;
    cuts.sort_by_key(|c| c.column);

    let survivors: Vec<usize> = (0..cuts.len())
        .filter(|&i| !cuts[i].status.is_rejected())
        .collect();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &survivors {
        match clusters.last_mut() {
            Some(cluster) if cuts[i].column - cuts[*cluster.last().unwrap()].column < char_width => {
                cluster.push(i)
            }
            _ => clusters.push(vec![i]),
        }
    }

    let mut inserted = Vec::new();
    for cluster in clusters {
        if cluster.len() == 1 {
            cuts[cluster[0]].advance(CutStatus::HeuristicValid);
            continue;
        }
        let sum: usize = cluster.iter().map(|&i| cuts[i].column).sum();
        let len = cluster.len();
        let center = (2 * sum + len) / (2 * len);
        let mut placed = false;
        for &i in &cluster {
            if cuts[i].column == center && !placed {
                cuts[i].advance(CutStatus::HeuristicValid);
                placed = true;
            } else {
                cuts[i].advance(CutStatus::WidthMerged);
            }
        }
        if !placed {
            inserted.push(CandidateCut {
                column: center,
                status: CutStatus::HeuristicValid,
                crossing_count: crossing_count(img, center),
            });
        }
    }

    cuts.extend(inserted);
    // stable: a rejected cut sharing a column with a new boundary stays first
    cuts.sort_by_key(|c| c.column);
    cuts
}

/// Largest contiguous band of rows whose ink count reaches `core_fraction`
/// of the busiest row. Ties go to the upper band.
pub fn detect_core_zone(img: &SkeletonImage, core_fraction: f64) -> Result<CoreZone> {
    let profile = img.row_profile();
    let max = profile.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Err(Error::EmptyImage);
    }
    let limit = core_fraction * max as f64;
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (y, &count) in profile.iter().enumerate().chain(std::iter::once((profile.len(), &0))) {
        let qualifies = y < profile.len() && count as f64 >= limit;
        match (qualifies, start) {
            (true, None) => start = Some(y),
            (false, Some(s)) => {
                let band = (s, y - 1);
                if best.is_none_or(|(bs, be)| band.1 - band.0 > be - bs) {
                    best = Some(band);
                }
                start = None;
            }
            _ => {}
        }
    }
    let (top_row, bottom_row) = best.expect("the peak row always qualifies");
    Ok(CoreZone { top_row, bottom_row })
}

/// Output of the heuristic stage for one word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicCuts {
    pub cuts: Vec<CandidateCut>,
    pub char_width: usize,
}

impl HeuristicCuts {
    pub fn valid(&self) -> impl Iterator<Item = &CandidateCut> {
        self.cuts.iter().filter(|c| c.status == CutStatus::HeuristicValid)
    }
}

/// Over-segment, filter loops, estimate the character width and merge.
pub fn run_heuristics(img: &SkeletonImage, params: &SegParams) -> Result<HeuristicCuts> {
    let cuts = filter_loops(oversegment(img, params)?, img);
    let char_width = estimate_char_width(img, &cuts, params);
    let cuts = merge_by_width(cuts, char_width, img);
    Ok(HeuristicCuts { cuts, char_width })
}
