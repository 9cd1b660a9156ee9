//! Synthetic cursive words with exact ground truth.
//!
//! Glyphs are drawn with a 2×2 pen between a fixed x-height line and a
//! baseline, and joined by single-pixel ligatures along the baseline. The
//! ground-truth boundary between two glyphs is the middle column of the
//! ligature gap. Words are upright, so ground-truth columns need no slant
//! mapping.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{write_manifest, CutLabel, LabeledCut, WordRecord};
use crate::error::{Error, Result};
use crate::imgproc::{save_pgm, BinaryImage, GrayImage};
use crate::pipeline::{analyze_word, PipelineConfig};

pub const CANVAS_HEIGHT: usize = 40;
const ASCENDER_TOP: i64 = 4;
/// First row of the x-height band.
pub const GEN_CORE_TOP: usize = 14;
/// Pen row of the baseline strokes; with the 2×2 pen they cover this row
/// and the next.
const BASELINE: i64 = 29;
/// Last row of the glyph-body band checked by [`SynthWord::gt_is_clear`].
pub const GEN_CORE_BOTTOM: usize = BASELINE as usize - 1;
const MARGIN: usize = 6;
/// Narrower draws are rejected and redrawn, so every word can be
/// over-segmented with the default divisor.
pub const MIN_INK_WIDTH: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlyphKind {
    /// Closed loop, as in 'o'.
    Ring,
    /// Two legs under one arch, as in 'n'.
    Arch,
    /// Three legs under two arches, as in 'm'.
    M,
    /// Two legs over one cup, as in 'u'.
    Cup,
    /// Three legs over two cups, as in 'w'.
    W,
    /// Short stem with a dot.
    I,
    /// Tall stem.
    L,
    /// Tall stem with an arch, as in 'h'.
    H,
}

impl GlyphKind {
    pub const ALL: [GlyphKind; 8] = [
        GlyphKind::Ring,
        GlyphKind::Arch,
        GlyphKind::M,
        GlyphKind::Cup,
        GlyphKind::W,
        GlyphKind::I,
        GlyphKind::L,
        GlyphKind::H,
    ];

    fn width_range(self) -> (usize, usize) {
        match self {
            GlyphKind::Ring => (11, 14),
            GlyphKind::Arch | GlyphKind::Cup | GlyphKind::H => (10, 13),
            GlyphKind::M | GlyphKind::W => (16, 20),
            GlyphKind::I | GlyphKind::L => (2, 3),
        }
    }
}

struct Pen {
    mask: BinaryImage,
}

impl Pen {
    fn dot(&mut self, x: i64, y: i64) {
        for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let (px, py) = (x + dx, y + dy);
            if px >= 0 && py >= 0 && (px as usize) < self.mask.width() && (py as usize) < self.mask.height() {
                self.mask.set(px as usize, py as usize, true);
            }
        }
    }

    fn line(&mut self, x0: i64, y0: i64, x1: i64, y1: i64) {
        let steps = (x1 - x0).abs().max((y1 - y0).abs()).max(1) * 2;
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let x = x0 as f64 + t * (x1 - x0) as f64;
            let y = y0 as f64 + t * (y1 - y0) as f64;
            self.dot(x.round() as i64, y.round() as i64);
        }
    }

    /// Elliptic arc; angles in radians, y grows downwards, angle 0 points right
    /// and π/2 points down.
    fn arc(&mut self, cx: f64, cy: f64, rx: f64, ry: f64, from: f64, to: f64) {
        let steps = ((rx + ry) * (to - from).abs() * 2.0).ceil().max(8.0) as usize;
        for s in 0..=steps {
            let t = from + (to - from) * s as f64 / steps as f64;
            self.dot((cx + rx * t.cos()).round() as i64, (cy + ry * t.sin()).round() as i64);
        }
    }

    /// Arch spanning pen columns `x0..=x1` with its crown on row `top`.
    fn arch(&mut self, x0: i64, x1: i64, top: i64) {
        let rx = (x1 - x0) as f64 / 2.0;
        self.arc(x0 as f64 + rx, (top + 3) as f64, rx, 3.0, PI, 2.0 * PI);
    }

    /// Cup spanning pen columns `x0..=x1` with its bottom on the baseline.
    fn cup(&mut self, x0: i64, x1: i64) {
        let rx = (x1 - x0) as f64 / 2.0;
        self.arc(x0 as f64 + rx, (BASELINE - 3) as f64, rx, 3.0, 0.0, PI);
    }
}

// Draws a glyph whose ink spans columns x0..x0 + width.
fn draw_glyph(pen: &mut Pen, kind: GlyphKind, x0: usize, width: usize) {
    let l = x0 as i64;
    let r = (x0 + width) as i64 - 2;
    let mid = (l + r) / 2;
    let top = GEN_CORE_TOP as i64;
    match kind {
        GlyphKind::Ring => {
            let rx = (r - l) as f64 / 2.0;
            let ry = (BASELINE - top) as f64 / 2.0;
            pen.arc(l as f64 + rx, top as f64 + ry, rx, ry, 0.0, 2.0 * PI);
            pen.line(l, BASELINE, r, BASELINE);
        }
        GlyphKind::Arch => {
            pen.line(l, top, l, BASELINE);
            pen.line(r, top + 3, r, BASELINE);
            pen.arch(l, r, top);
        }
        GlyphKind::H => {
            pen.line(l, ASCENDER_TOP, l, BASELINE);
            pen.line(r, top + 3, r, BASELINE);
            pen.arch(l, r, top);
        }
        GlyphKind::M => {
            pen.line(l, top, l, BASELINE);
            pen.line(mid, top + 3, mid, BASELINE);
            pen.line(r, top + 3, r, BASELINE);
            pen.arch(l, mid, top);
            pen.arch(mid, r, top);
        }
        GlyphKind::Cup => {
            pen.line(l, top, l, BASELINE);
            pen.line(r, top, r, BASELINE);
            pen.cup(l, r);
        }
        GlyphKind::W => {
            // outer legs reach the baseline so the ligatures attach
            pen.line(l, top, l, BASELINE);
            pen.line(mid, top, mid, BASELINE - 3);
            pen.line(r, top, r, BASELINE);
            pen.cup(l, mid);
            pen.cup(mid, r);
        }
        // stems fill the glyph width so the ligatures on both sides touch
        GlyphKind::I => {
            pen.line(l, top + 2, l, BASELINE);
            pen.line(r, top + 2, r, BASELINE);
            pen.dot(l, top - 5);
        }
        GlyphKind::L => {
            pen.line(l, ASCENDER_TOP, l, BASELINE);
            pen.line(r, ASCENDER_TOP, r, BASELINE);
        }
    }
}

/// One generated word.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthWord {
    pub record: WordRecord,
    pub image: GrayImage,
    pub glyphs: Vec<GlyphKind>,
    /// Ink mask as drawn, before gray-level noise.
    pub ink: BinaryImage,
}

impl SynthWord {
    /// Every ground-truth column is free of ink over the glyph-body band.
    pub fn gt_is_clear(&self) -> bool {
        self.record
            .gt_boundaries
            .iter()
            .all(|&x| (GEN_CORE_TOP..=GEN_CORE_BOTTOM).all(|y| !self.ink.get(x, y)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesizedCorpus {
    pub words: Vec<SynthWord>,
}

impl SynthesizedCorpus {
    pub fn records(&self) -> Vec<WordRecord> {
        self.words.iter().map(|w| w.record.clone()).collect()
    }

    /// Writes `word_NNNN.pgm` files plus the manifest; record image paths
    /// are updated to point into `dir`.
    pub fn write_to(&mut self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for w in &mut self.words {
            let file = dir.join(format!("{}.pgm", w.record.word_id));
            save_pgm(&w.image, &file)?;
            w.record.image_path = file;
        }
        write_manifest(dir, &self.records())
    }
}

/// Generates `word_count` words of 3–8 glyphs drawn from `alphabet`.
/// Identical arguments give identical output.
pub fn synthesize_corpus(seed: u64, word_count: usize, alphabet: &[GlyphKind]) -> Result<SynthesizedCorpus> {
    if word_count == 0 {
        return Err(Error::InvalidParameter("word_count must be >= 1".into()));
    }
    if alphabet.is_empty() {
        return Err(Error::InvalidParameter("alphabet is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words = Vec::with_capacity(word_count);
    for index in 0..word_count {
        let (glyphs, widths, gaps) = loop {
            let count = rng.gen_range(3..=8);
            let glyphs: Vec<GlyphKind> = (0..count).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
            let widths: Vec<usize> = glyphs
                .iter()
                .map(|g| {
                    let (lo, hi) = g.width_range();
                    rng.gen_range(lo..=hi)
                })
                .collect();
            let gaps: Vec<usize> = (1..count).map(|_| rng.gen_range(5..=9)).collect();
            if widths.iter().sum::<usize>() + gaps.iter().sum::<usize>() >= MIN_INK_WIDTH {
                break (glyphs, widths, gaps);
            }
        };
        let count = glyphs.len();

        let total = 2 * MARGIN + widths.iter().sum::<usize>() + gaps.iter().sum::<usize>();
        let mut pen = Pen {
            mask: BinaryImage::blank(total, CANVAS_HEIGHT),
        };
        let mut x = MARGIN;
        let mut gt = Vec::with_capacity(count - 1);
        for (i, (&kind, &w)) in glyphs.iter().zip(&widths).enumerate() {
            draw_glyph(&mut pen, kind, x, w);
            x += w;
            if let Some(&gap) = gaps.get(i) {
                for lx in x..x + gap {
                    pen.mask.set(lx, BASELINE as usize + 1, true);
                }
                gt.push(x + (gap - 1) / 2);
                x += gap;
            }
        }

        let ink = pen.mask;
        let pixels = ink
            .pixels()
            .iter()
            .map(|&p| if p { rng.gen_range(10..=60) } else { rng.gen_range(200..=250) })
            .collect();
        let image = GrayImage::new(total, CANVAS_HEIGHT, pixels)?;
        let word_id = format!("word_{index:04}");
        words.push(SynthWord {
            record: WordRecord {
                image_path: format!("{word_id}.pgm").into(),
                word_id,
                gt_boundaries: gt,
                cuts: Vec::new(),
            },
            image,
            glyphs,
            ink,
        });
    }
    Ok(SynthesizedCorpus { words })
}

/// Labels every candidate cut of each word: valid iff it lies within
/// `tolerance` columns of a ground-truth boundary.
pub fn auto_label(records: &mut [WordRecord], cfg: &PipelineConfig, tolerance: usize) -> Result<()> {
    for rec in records {
        let analysis = analyze_word(&rec.load_image()?, cfg)?;
        let mut cuts: Vec<LabeledCut> = analysis
            .candidates()
            .map(|c| {
                let column = analysis.source_column(c.column);
                let near = rec.gt_boundaries.iter().any(|&g| g.abs_diff(column) <= tolerance);
                LabeledCut {
                    column,
                    label: if near { CutLabel::Valid } else { CutLabel::Invalid },
                }
            })
            .collect();
        cuts.sort_by_key(|c| c.column);
        rec.cuts = cuts;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = synthesize_corpus(42, 5, &GlyphKind::ALL).unwrap();
        let b = synthesize_corpus(42, 5, &GlyphKind::ALL).unwrap();
        assert_eq!(a, b);
        let c = synthesize_corpus(43, 5, &GlyphKind::ALL).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gt_count_is_joins() {
        let corpus = synthesize_corpus(1, 30, &GlyphKind::ALL).unwrap();
        for w in &corpus.words {
            assert_eq!(w.record.gt_boundaries.len(), w.glyphs.len() - 1);
            assert!((3..=8).contains(&w.glyphs.len()));
            assert!(w.image.width() >= MIN_INK_WIDTH + 2 * MARGIN);
            w.record.check_gt(w.image.width()).unwrap();
            assert!(w.gt_is_clear(), "{}", w.record.word_id);
        }
    }

    #[test]
    fn words_are_connected() {
        // every kind except the dotted stem is one stroke
        let kinds: Vec<GlyphKind> = GlyphKind::ALL.into_iter().filter(|&k| k != GlyphKind::I).collect();
        let corpus = synthesize_corpus(5, 40, &kinds).unwrap();
        for w in &corpus.words {
            assert_eq!(crate::imgproc::count_components(&w.ink), 1, "{}", w.record.word_id);
        }
    }
}
