//! Raster word images and the preprocessing chain: binarization, slant
//! correction and thinning.

mod otsu;
mod pnm;
mod slant;
mod thin;

pub use otsu::{between_class_variance, otsu_threshold};
pub use pnm::{encode_pbm, encode_pgm, load_image, parse_pgm, save_binary_pgm, save_pbm, save_pgm};
pub use slant::{correct_slant, correct_slant_with_transform, shear_rows, SlantCorrection};
pub use thin::thin;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::MalformedImage(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::MalformedImage(format!(
                "expected {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    /// 256-bin intensity histogram.
    pub fn histogram(&self) -> [u64; 256] {
        let mut hist = [0u64; 256];
        for &p in &self.pixels {
            hist[p as usize] += 1;
        }
        hist
    }
}

/// Binary raster; `true` is ink.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::MalformedImage(format!(
                "expected {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn blank(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![false; width * height],
        }
    }

    /// Builds an image from rows of `'#'` (ink) and any other character
    /// (background). All rows must have equal length.
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut pixels = Vec::with_capacity(width * height);
        for row in rows {
            assert_eq!(row.chars().count(), width, "ragged ascii image");
            pixels.extend(row.chars().map(|c| c == '#'));
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    /// Bounds-checked lookup; anything outside the raster is background.
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            false
        } else {
            self.pixels[y as usize * self.width + x as usize]
        }
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.pixels[y * self.width + x] = value;
    }

    pub fn foreground_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.pixels.iter().any(|&p| p)
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)` of the ink, if any.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bbox: Option<(usize, usize, usize, usize)> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    bbox = Some(match bbox {
                        None => (x, y, x, y),
                        Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
                    });
                }
            }
        }
        bbox
    }

    /// Copies the inclusive rectangle `(x0, y0)..=(x1, y1)`.
    pub fn crop(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> BinaryImage {
        let width = x1 + 1 - x0;
        let height = y1 + 1 - y0;
        let mut out = BinaryImage::blank(width, height);
        for y in 0..height {
            let src = (y0 + y) * self.width + x0;
            out.pixels[y * width..(y + 1) * width].copy_from_slice(&self.pixels[src..src + width]);
        }
        out
    }

    /// Ink count per column.
    pub fn column_profile(&self) -> Vec<usize> {
        let mut profile = vec![0; self.width];
        for y in 0..self.height {
            for (x, count) in profile.iter_mut().enumerate() {
                if self.get(x, y) {
                    *count += 1;
                }
            }
        }
        profile
    }

    /// Ink count per row.
    pub fn row_profile(&self) -> Vec<usize> {
        (0..self.height)
            .map(|y| {
                self.pixels[y * self.width..(y + 1) * self.width]
                    .iter()
                    .filter(|&&p| p)
                    .count()
            })
            .collect()
    }

    /// Renders ink as 0 and background as 255.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width.max(1),
            height: self.height.max(1),
            pixels: if self.width == 0 || self.height == 0 {
                vec![255]
            } else {
                self.pixels.iter().map(|&p| if p { 0 } else { 255 }).collect()
            },
        }
    }
}

/// A binary image that has been thinned to a fixed point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkeletonImage(BinaryImage);

impl SkeletonImage {
    /// Wraps an image the caller asserts is already thin. Use [`thin`] for
    /// arbitrary input.
    pub fn assume_thin(img: BinaryImage) -> Self {
        SkeletonImage(img)
    }

    pub fn as_binary(&self) -> &BinaryImage {
        &self.0
    }

    pub fn into_binary(self) -> BinaryImage {
        self.0
    }

    pub fn width(&self) -> usize {
        self.0.width
    }

    pub fn height(&self) -> usize {
        self.0.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.0.get(x, y)
    }
}

impl std::ops::Deref for SkeletonImage {
    type Target = BinaryImage;

    fn deref(&self) -> &BinaryImage {
        &self.0
    }
}

/// Binarizes, slant-corrects and thins a gray word image.
pub fn preprocess(img: &GrayImage) -> (SkeletonImage, SlantCorrection) {
    let (_, binary) = otsu_threshold(img);
    let correction = correct_slant_with_transform(&binary);
    let skeleton = thin(&correction.image);
    (skeleton, correction)
}

/// Number of 8-connected ink components.
pub fn count_components(img: &BinaryImage) -> usize {
    let (w, h) = (img.width(), img.height());
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    let mut components = 0;
    for start in 0..w * h {
        if !img.pixels[start] || seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if img.get_signed(nx, ny) {
                        let j = ny as usize * w + nx as usize;
                        if !seen[j] {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
        }
    }
    components
}
