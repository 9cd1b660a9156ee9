//! Non-linear segmentation paths and character extraction.
//!
//! A path holds one column per row and moves at most one column between
//! rows. It is the cheapest such path through a seed pixel on the validated
//! cut, where each visited cell costs `lambda * |col - cut| + INK_PENALTY`
//! for ink cells and `lambda * |col - cut|` otherwise.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::{encode_pgm, BinaryImage, GrayImage, SkeletonImage};
use crate::segmenter::{CandidateCut, CoreZone, CutStatus};

pub const INK_PENALTY: f64 = 1e6;
pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentationPath {
    pub seed_column: usize,
    pub columns: Vec<usize>,
}

impl SegmentationPath {
    pub fn straight(column: usize, height: usize) -> Self {
        SegmentationPath {
            seed_column: column,
            columns: vec![column; height],
        }
    }

    pub fn is_continuous(&self) -> bool {
        self.columns.windows(2).all(|p| p[0].abs_diff(p[1]) <= 1)
    }

    /// Ink pixels the path passes over.
    pub fn ink_crossings(&self, img: &BinaryImage) -> usize {
        self.columns
            .iter()
            .enumerate()
            .filter(|&(y, &x)| img.get(x, y))
            .count()
    }
}

/// Per-cell cost grid, row-major.
pub fn cost_grid(img: &BinaryImage, cut_column: usize, lambda: f64) -> Vec<f64> {
    let mut grid = Vec::with_capacity(img.width() * img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            let deviation = lambda * x.abs_diff(cut_column) as f64;
            grid.push(deviation + if img.get(x, y) { INK_PENALTY } else { 0.0 });
        }
    }
    grid
}

/// Background row in `column` closest to the core-zone center (upper row on
/// ties); the center itself when the column has no background.
pub fn seed_row(img: &BinaryImage, column: usize, zone: &CoreZone) -> usize {
    let center = zone.center_row().min(img.height() - 1);
    (0..img.height())
        .filter(|&y| !img.get(column, y))
        .min_by_key(|&y| (y.abs_diff(center), y))
        .unwrap_or(center)
}

/// Cheapest row-monotone path through `(seed_row, seed_column)` over an
/// arbitrary `width × height` cost grid. Returns the path and its total cost.
/// Equal-cost choices resolve to the smaller column.
pub fn min_cost_path(costs: &[f64], width: usize, height: usize, seed_row: usize, seed_column: usize) -> (Vec<usize>, f64) {
    assert_eq!(costs.len(), width * height);
    assert!(seed_row < height && seed_column < width);
    let at = |y: usize, x: usize| costs[y * width + x];

    // Best cost of a partial path from the seed out to row y, ending at x.
    let mut acc = vec![f64::INFINITY; width * height];
    acc[seed_row * width + seed_column] = at(seed_row, seed_column);

    let relax = |acc: &mut Vec<f64>, from: usize, to: usize| {
        for x in 0..width {
            let lo = x.saturating_sub(1);
            let hi = (x + 1).min(width - 1);
            let best = (lo..=hi).map(|px| acc[from * width + px]).fold(f64::INFINITY, f64::min);
            if best.is_finite() {
                acc[to * width + x] = best + at(to, x);
            }
        }
    };
    for y in (0..seed_row).rev() {
        relax(&mut acc, y + 1, y);
    }
    for y in seed_row + 1..height {
        relax(&mut acc, y - 1, y);
    }

    // smallest acc among columns lo..=hi of a row; first (smaller) wins ties
    let pick = |row: usize, lo: usize, hi: usize| {
        (lo..=hi)
            .map(|x| (x, acc[row * width + x]))
            .fold((lo, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
            .0
    };

    let last = height - 1;
    let mut columns = vec![seed_column; height];
    columns[0] = pick(0, 0, width - 1);
    for y in 1..seed_row {
        let above = columns[y - 1];
        columns[y] = pick(y, above.saturating_sub(1), (above + 1).min(width - 1));
    }
    columns[last] = pick(last, 0, width - 1);
    for y in (seed_row + 1..last).rev() {
        let below = columns[y + 1];
        columns[y] = pick(y, below.saturating_sub(1), (below + 1).min(width - 1));
    }

    let total = acc[columns[0]] + acc[last * width + columns[last]] - at(seed_row, seed_column);
    (columns, total)
}

/// Traces the segmentation path for a validated cut.
///
/// # Panics
///
/// If the cut is not heuristic- or network-validated, or lies outside the
/// image.
pub fn trace_path(img: &SkeletonImage, cut: &CandidateCut, zone: &CoreZone, lambda: f64) -> SegmentationPath {
    assert!(
        matches!(cut.status, CutStatus::NnValid | CutStatus::HeuristicValid),
        "only validated cuts are traced"
    );
    assert!(cut.column < img.width(), "cut column outside image");
    let grid = cost_grid(img, cut.column, lambda);
    let row = seed_row(img, cut.column, zone);
    let (columns, _) = min_cost_path(&grid, img.width(), img.height(), row, cut.column);
    SegmentationPath {
        seed_column: cut.column,
        columns,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterSegment {
    pub index: usize,
    /// Ink inside the segment, cropped to its bounding box (0×0 if none).
    pub image: BinaryImage,
    /// Position of `image`'s top-left pixel in the word.
    pub x_offset: usize,
    pub y_offset: usize,
    pub left_path: Option<SegmentationPath>,
    pub right_path: Option<SegmentationPath>,
}

impl CharacterSegment {
    /// Word coordinates of every ink pixel in the segment.
    pub fn ink_pixels(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 0..self.image.height() {
            for x in 0..self.image.width() {
                if self.image.get(x, y) {
                    out.push((x + self.x_offset, y + self.y_offset));
                }
            }
        }
        out
    }
}

/// Keeps, in seed order, each path that does not cross the last kept one.
/// Two independently traced paths only cross when both detour through the
/// same gap, so the later one adds no boundary. Returns the kept paths and
/// the seed columns of the dropped ones.
pub fn non_crossing(paths: Vec<SegmentationPath>) -> (Vec<SegmentationPath>, Vec<usize>) {
    let mut kept: Vec<SegmentationPath> = Vec::with_capacity(paths.len());
    let mut dropped = Vec::new();
    for p in paths {
        let crosses = kept
            .last()
            .is_some_and(|prev| prev.columns.iter().zip(&p.columns).any(|(a, b)| a > b));
        if crosses {
            dropped.push(p.seed_column);
        } else {
            kept.push(p);
        }
    }
    (kept, dropped)
}

/// Splits the word along `paths` (sorted by seed column, non-crossing). In
/// each row, segment `i` owns columns `[paths[i-1][row], paths[i][row])`.
pub fn segment_characters(img: &BinaryImage, paths: &[SegmentationPath]) -> Result<Vec<CharacterSegment>> {
    for (i, p) in paths.iter().enumerate() {
        if p.columns.len() != img.height() {
            return Err(Error::InvalidParameter(format!(
                "path {i} has {} rows, image has {}",
                p.columns.len(),
                img.height()
            )));
        }
    }
    for i in 1..paths.len() {
        if paths[i - 1].seed_column > paths[i].seed_column {
            return Err(Error::InvalidParameter("paths are not sorted by seed column".into()));
        }
        if let Some(row) = (0..img.height()).find(|&r| paths[i - 1].columns[r] > paths[i].columns[r]) {
            return Err(Error::CrossingPaths {
                left: i - 1,
                right: i,
                row,
            });
        }
    }

    let mut segments = Vec::with_capacity(paths.len() + 1);
    for i in 0..=paths.len() {
        let mut mask = BinaryImage::blank(img.width(), img.height());
        for y in 0..img.height() {
            let lo = if i == 0 { 0 } else { paths[i - 1].columns[y] };
            let hi = if i == paths.len() { img.width() } else { paths[i].columns[y] };
            for x in lo..hi.min(img.width()) {
                if img.get(x, y) {
                    mask.set(x, y, true);
                }
            }
        }
        let (image, x_offset, y_offset) = match mask.bounding_box() {
            Some((x0, y0, x1, y1)) => (mask.crop(x0, y0, x1, y1), x0, y0),
            None => (BinaryImage::blank(0, 0), 0, 0),
        };
        segments.push(CharacterSegment {
            index: i,
            image,
            x_offset,
            y_offset,
            left_path: (i > 0).then(|| paths[i - 1].clone()),
            right_path: paths.get(i).cloned(),
        });
    }
    Ok(segments)
}

pub const REJECTED_CUT_LEVEL: u8 = 200;
pub const VALID_CUT_LEVEL: u8 = 150;
pub const PATH_LEVEL: u8 = 90;

/// Draws rejected cuts, accepted cuts and then paths over a copy of `img`.
pub fn overlay(img: &GrayImage, cuts: &[CandidateCut], paths: &[SegmentationPath]) -> GrayImage {
    let mut out = img.clone();
    for cut in cuts.iter().filter(|c| c.column < img.width()) {
        let level = if cut.status.is_rejected() {
            REJECTED_CUT_LEVEL
        } else if cut.status.is_accepted() {
            VALID_CUT_LEVEL
        } else {
            continue;
        };
        for y in 0..img.height() {
            out.set(cut.column, y, level);
        }
    }
    for path in paths {
        for (y, &x) in path.columns.iter().enumerate().take(img.height()) {
            if x < img.width() {
                out.set(x, y, PATH_LEVEL);
            }
        }
    }
    out
}

pub fn render_overlay(
    img: &GrayImage,
    cuts: &[CandidateCut],
    paths: &[SegmentationPath],
    out_path: impl AsRef<Path>,
) -> Result<()> {
    let out_path = out_path.as_ref();
    fs::write(out_path, encode_pgm(&overlay(img, cuts, paths))).map_err(|e| Error::io(out_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn valid(column: usize) -> CandidateCut {
        CandidateCut {
            column,
            status: CutStatus::NnValid,
            crossing_count: 0,
        }
    }

    fn zone(h: usize) -> CoreZone {
        CoreZone {
            top_row: 0,
            bottom_row: h - 1,
        }
    }

    #[test]
    fn crossing_path_is_dropped() {
        let a = SegmentationPath { seed_column: 5, columns: vec![5, 6, 7] };
        let b = SegmentationPath { seed_column: 6, columns: vec![6, 6, 6] };
        let c = SegmentationPath { seed_column: 9, columns: vec![9, 9, 9] };
        let (kept, dropped) = non_crossing(vec![a.clone(), b, c.clone()]);
        assert_eq!(kept, vec![a, c]);
        assert_eq!(dropped, vec![6]);
    }

    #[test]
    fn blank_image_straight_path() {
        let img = SkeletonImage::assume_thin(BinaryImage::blank(60, 20));
        let p = trace_path(&img, &valid(30), &zone(20), 1.0);
        assert_eq!(p.columns, vec![30; 20]);
    }

    #[test]
    fn detours_through_gap() {
        let mut img = BinaryImage::blank(60, 20);
        for x in 0..60 {
            if x != 28 {
                img.set(x, 5, true);
            }
        }
        let zone = CoreZone { top_row: 10, bottom_row: 16 };
        let p = trace_path(&SkeletonImage::assume_thin(img.clone()), &valid(30), &zone, 1.0);
        assert_eq!(p.columns[5], 28);
        assert_eq!(p.ink_crossings(&img), 0);
        assert!(p.is_continuous());
        assert_eq!(p.columns[0], 30);
        assert_eq!(p.columns[19], 30);
    }

    #[test]
    fn seed_row_prefers_background_near_center() {
        let img = BinaryImage::from_ascii(&[".", "#", "#", ".", "."]);
        let z = CoreZone { top_row: 1, bottom_row: 3 };
        assert_eq!(seed_row(&img, 0, &z), 3);
        let full = BinaryImage::from_ascii(&["#", "#", "#"]);
        assert_eq!(seed_row(&full, 0, &CoreZone { top_row: 0, bottom_row: 2 }), 1);
    }

    #[test]
    fn no_paths_single_segment() {
        let img = BinaryImage::from_ascii(&["#..#", ".##."]);
        let segs = segment_characters(&img, &[]).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].image, img);
    }

    #[test]
    fn straight_split_halves() {
        let img = BinaryImage::new(60, 4, vec![true; 240]).unwrap();
        let segs = segment_characters(&img, &[SegmentationPath::straight(30, 4)]).unwrap();
        assert_eq!(segs[0].image.width(), 30);
        assert_eq!(segs[1].image.width(), 30);
        assert_eq!(segs[1].x_offset, 30);
    }

    #[test]
    fn crossing_paths_rejected() {
        let img = BinaryImage::blank(10, 2);
        let a = SegmentationPath { seed_column: 3, columns: vec![3, 5] };
        let b = SegmentationPath { seed_column: 4, columns: vec![4, 4] };
        assert!(matches!(
            segment_characters(&img, &[a, b]),
            Err(Error::CrossingPaths { left: 0, right: 1, row: 1 })
        ));
    }

    #[test]
    fn overlay_touches_exactly_path_pixels() {
        let img = GrayImage::filled(10, 6, 255);
        let path = SegmentationPath { seed_column: 4, columns: vec![4, 5, 5, 4, 3, 3] };
        let out = overlay(&img, &[], &[path]);
        let changed = out.pixels().iter().zip(img.pixels()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 6);
        assert_eq!(overlay(&img, &[], &[]), img);
    }
}
