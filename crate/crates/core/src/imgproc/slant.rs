//! Slant correction by shear search over the vertical projection profile.

use serde::{Deserialize, Serialize};

use super::BinaryImage;

pub const MAX_SLANT_DEG: i32 = 45;

/// Result of [`correct_slant_with_transform`]: the corrected, cropped image
/// plus what is needed to map its coordinates back to the input raster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlantCorrection {
    pub angle_deg: i32,
    pub image: BinaryImage,
    source_height: usize,
    pad: usize,
    crop_x: usize,
    crop_y: usize,
}

impl SlantCorrection {
    fn identity(img: &BinaryImage) -> Self {
        SlantCorrection {
            angle_deg: 0,
            image: img.clone(),
            source_height: img.height(),
            pad: 0,
            crop_x: 0,
            crop_y: 0,
        }
    }

    /// Column in the input image of pixel `(x, y)` of the corrected image.
    pub fn source_column(&self, x: usize, y: usize) -> i64 {
        let src_y = y + self.crop_y;
        x as i64 + self.crop_x as i64 - self.pad as i64 - row_shift(self.angle_deg, src_y, self.source_height)
    }

    /// Inverse of [`Self::source_column`] for an input-image pixel. The
    /// result may fall outside the corrected image.
    pub fn corrected_column(&self, src_x: i64, src_y: usize) -> i64 {
        src_x + self.pad as i64 + row_shift(self.angle_deg, src_y, self.source_height) - self.crop_x as i64
    }

    pub fn source_row(&self, y: usize) -> usize {
        y + self.crop_y
    }
}

// Horizontal displacement of row y, measured from the vertical center so the
// shear for +a and -a cancel exactly.
fn row_shift(angle_deg: i32, y: usize, height: usize) -> i64 {
    if angle_deg == 0 {
        return 0;
    }
    let tan = (angle_deg as f64).to_radians().tan();
    let dy = (height as f64 - 1.0) / 2.0 - y as f64;
    (dy * tan).round() as i64
}

fn max_shift(height: usize) -> usize {
    let tan = (MAX_SLANT_DEG as f64).to_radians().tan();
    ((height as f64) / 2.0 * tan).ceil() as usize + 1
}

/// Shears `img` by `angle_deg`, shifting each row by a whole number of
/// pixels. The output is padded on both sides so no ink is lost; it is not
/// cropped.
pub fn shear_rows(img: &BinaryImage, angle_deg: i32) -> BinaryImage {
    let pad = max_shift(img.height()).max(row_shift_bound(img.height(), angle_deg));
    shear_with_pad(img, angle_deg, pad)
}

fn row_shift_bound(height: usize, angle_deg: i32) -> usize {
    (0..height)
        .map(|y| row_shift(angle_deg, y, height).unsigned_abs() as usize)
        .max()
        .unwrap_or(0)
}

fn shear_with_pad(img: &BinaryImage, angle_deg: i32, pad: usize) -> BinaryImage {
    let width = img.width() + 2 * pad;
    let mut out = BinaryImage::blank(width, img.height());
    for y in 0..img.height() {
        let shift = row_shift(angle_deg, y, img.height());
        for x in 0..img.width() {
            if img.get(x, y) {
                let nx = x as i64 + pad as i64 + shift;
                out.set(nx as usize, y, true);
            }
        }
    }
    out
}

// Proportional to the variance of the column profile over a window of fixed
// width: total ink is constant across shears, so only the sum of squares moves.
fn profile_score(img: &BinaryImage) -> u64 {
    img.column_profile()
        .iter()
        .map(|&c| (c as u64) * (c as u64))
        .sum()
}

pub fn correct_slant(img: &BinaryImage) -> BinaryImage {
    correct_slant_with_transform(img).image
}

/// Searches shear angles in whole degrees over ±45° for the one that
/// maximizes projection variance, applies it and crops to the ink. Angles
/// are tried in order of increasing magnitude (negative first), and only a
/// strict improvement replaces the incumbent.
pub fn correct_slant_with_transform(img: &BinaryImage) -> SlantCorrection {
    let Some(_) = img.bounding_box() else {
        return SlantCorrection::identity(img);
    };
    let pad = max_shift(img.height());

    let mut best_angle = 0;
    let mut best_score = profile_score(&shear_with_pad(img, 0, pad));
    for magnitude in 1..=MAX_SLANT_DEG {
        for angle in [-magnitude, magnitude] {
            let score = profile_score(&shear_with_pad(img, angle, pad));
            if score > best_score {
                best_score = score;
                best_angle = angle;
            }
        }
    }

    let sheared = shear_with_pad(img, best_angle, pad);
    let (x0, y0, x1, y1) = sheared.bounding_box().expect("shear preserves ink");
    SlantCorrection {
        angle_deg: best_angle,
        image: sheared.crop(x0, y0, x1, y1),
        source_height: img.height(),
        pad,
        crop_x: x0,
        crop_y: y0,
    }
}
