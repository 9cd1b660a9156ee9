//! Fixed-length description of a candidate cut's neighbourhood.
//!
//! Layout: a `grid × grid` block of ink densities over a window centered on
//! the cut, followed by six scalars:
//!
//! | slot | value |
//! |------|-------|
//! | 0 | crossing count / 10 |
//! | 1 | smallest crossing count within ±2 columns / 10 |
//! | 2 | distance to the nearest other cut / image width |
//! | 3 | ink density of the left half-window |
//! | 4 | ink density of the right half-window |
//! | 5 | cut column / image width |
//!
//! Every value is clamped to `[0, 1]`. Window pixels outside the image count
//! as background.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::SkeletonImage;
use crate::segmenter::{crossing_count, CandidateCut};

pub const SCALAR_FEATURES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Window width in pixels; `None` uses twice the character width.
    pub window_cols: Option<usize>,
    pub grid: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            window_cols: None,
            grid: 8,
        }
    }
}

impl FeatureConfig {
    pub fn dim(&self) -> usize {
        self.grid * self.grid + SCALAR_FEATURES
    }

    pub fn window_for(&self, char_width: usize) -> usize {
        self.window_cols.unwrap_or(2 * char_width).max(2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid < 2 {
            return Err(Error::InvalidParameter(format!("grid must be >= 2, got {}", self.grid)));
        }
        if matches!(self.window_cols, Some(w) if w < 2) {
            return Err(Error::InvalidParameter("window_cols must be >= 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

// Ink fraction over columns [x0, x1) and rows [y0, y1), zero-padded.
fn density(img: &SkeletonImage, x0: i64, x1: i64, y0: usize, y1: usize) -> f64 {
    let area = (x1 - x0).max(0) as usize * (y1 - y0);
    if area == 0 {
        return 0.0;
    }
    let mut ink = 0usize;
    for y in y0..y1 {
        for x in x0.max(0)..x1.min(img.width() as i64) {
            if img.get(x as usize, y) {
                ink += 1;
            }
        }
    }
    ink as f64 / area as f64
}

// Split [0, len) into `parts` nonempty-where-possible ranges.
fn band(i: usize, parts: usize, len: usize) -> (usize, usize) {
    let start = i * len / parts;
    let end = ((i + 1) * len / parts).max(start + 1).min(len.max(start + 1));
    (start, end)
}

/// Builds the feature vector for `cut`. `cuts` is the word's full cut list,
/// used for the nearest-neighbour distance; `char_width` sizes the window
/// when the config does not fix it.
pub fn extract_features(
    img: &SkeletonImage,
    cut: &CandidateCut,
    cuts: &[CandidateCut],
    cfg: &FeatureConfig,
    char_width: usize,
) -> FeatureVector {
    let (width, height) = (img.width(), img.height());
    let g = cfg.grid;
    let window = cfg.window_for(char_width) as i64;
    let col = cut.column as i64;
    let left = col - window / 2;

    let mut values = Vec::with_capacity(cfg.dim());
    for gy in 0..g {
        let (y0, y1) = band(gy, g, height);
        let y1 = y1.min(height);
        for gx in 0..g {
            let (cx0, cx1) = band(gx, g, window as usize);
            let v = if y0 >= height {
                0.0
            } else {
                density(img, left + cx0 as i64, left + cx1 as i64, y0, y1)
            };
            values.push(clamp01(v));
        }
    }

    let crossings = if cut.column < width {
        crossing_count(img, cut.column)
    } else {
        0
    };
    values.push(clamp01(crossings as f64 / 10.0));

    let lo = cut.column.saturating_sub(2);
    let hi = (cut.column + 2).min(width.saturating_sub(1));
    let min_nearby = (lo..=hi).map(|c| crossing_count(img, c)).min().unwrap_or(0);
    values.push(clamp01(min_nearby as f64 / 10.0));

    let nearest = cuts
        .iter()
        .filter(|c| c.column != cut.column)
        .map(|c| c.column.abs_diff(cut.column))
        .min();
    values.push(match nearest {
        Some(d) => clamp01(d as f64 / width as f64),
        None => 1.0,
    });

    values.push(clamp01(density(img, left, col, 0, height)));
    values.push(clamp01(density(img, col, col + window - window / 2, 0, height)));
    values.push(clamp01(cut.column as f64 / width as f64));

    FeatureVector(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgproc::BinaryImage;

    fn blank(w: usize, h: usize) -> SkeletonImage {
        SkeletonImage::assume_thin(BinaryImage::blank(w, h))
    }

    #[test]
    fn blank_image_is_all_zero() {
        let img = blank(60, 30);
        let cut = CandidateCut::proposed(30);
        let fv = extract_features(&img, &cut, &[cut], &FeatureConfig::default(), 10);
        assert_eq!(fv.len(), 70);
        assert!(fv.0[..64].iter().all(|&v| v == 0.0));
        assert_eq!(fv.0[64], 0.0);
        assert_eq!(fv.0[65], 0.0);
        assert_eq!(fv.0[67], 0.0);
        assert_eq!(fv.0[68], 0.0);
    }

    #[test]
    fn saturated_window() {
        let img = SkeletonImage::assume_thin(BinaryImage::new(40, 16, vec![true; 640]).unwrap());
        let cut = CandidateCut::proposed(20);
        let fv = extract_features(&img, &cut, &[cut], &FeatureConfig::default(), 8);
        assert!(fv.0[..64].iter().all(|&v| v == 1.0));
    }

    #[test]
    fn geometry_scalars() {
        let img = blank(100, 20);
        let cuts = [CandidateCut::proposed(0), CandidateCut::proposed(10)];
        let fv = extract_features(&img, &cuts[0], &cuts, &FeatureConfig::default(), 10);
        assert!((fv.0[66] - 0.10).abs() < 1e-12);
        assert_eq!(fv.0[69], 0.0);
    }

    #[test]
    fn tiny_image_still_has_full_length() {
        let img = SkeletonImage::assume_thin(BinaryImage::from_ascii(&["#.", ".#"]));
        let cut = CandidateCut::proposed(1);
        let fv = extract_features(&img, &cut, &[cut], &FeatureConfig::default(), 1);
        assert_eq!(fv.len(), 70);
        assert!(fv.0.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
