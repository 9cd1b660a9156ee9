//! Binary PGM (P5) reading, PGM/PBM (P4) writing.

use std::fs;
use std::path::Path;

use super::{BinaryImage, GrayImage};
use crate::error::{Error, Result};

pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes)
}

/// Parses a P5 stream. Samples above `maxval` are rejected; values are kept
/// as stored, not rescaled.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut cursor = HeaderCursor { bytes, pos: 0 };
    let magic = cursor.token()?;
    if magic != b"P5" {
        return Err(Error::MalformedImage("missing P5 magic number".into()));
    }
    let width = cursor.number("width")?;
    let height = cursor.number("height")?;
    let maxval = cursor.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(Error::MalformedImage("no whitespace after maxval".into())),
    }
    let (width, height) = (width as usize, height as usize);
    let raster = &bytes[cursor.pos..];
    let needed = width * height;
    if raster.len() < needed {
        return Err(Error::MalformedImage(format!(
            "raster truncated: expected {needed} bytes, found {}",
            raster.len()
        )));
    }
    let pixels = raster[..needed].to_vec();
    if let Some(&bad) = pixels.iter().find(|&&p| u32::from(p) > maxval) {
        return Err(Error::MalformedImage(format!(
            "sample {bad} exceeds maxval {maxval}"
        )));
    }
    GrayImage::new(width, height, pixels)
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || b == b'#' {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedImage("unexpected end of header".into()));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| Error::MalformedImage(format!("bad {what} field")))
    }
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

/// P4 raster: one bit per pixel, 1 = ink, rows padded to whole bytes.
pub fn encode_pbm(img: &BinaryImage) -> Vec<u8> {
    let mut out = format!("P4\n{} {}\n", img.width(), img.height()).into_bytes();
    let row_bytes = img.width().div_ceil(8);
    for y in 0..img.height() {
        let mut row = vec![0u8; row_bytes];
        for x in 0..img.width() {
            if img.get(x, y) {
                row[x / 8] |= 0x80 >> (x % 8);
            }
        }
        out.extend_from_slice(&row);
    }
    out
}

pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}

pub fn save_binary_pgm(img: &BinaryImage, path: impl AsRef<Path>) -> Result<()> {
    save_pgm(&img.to_gray(), path)
}

pub fn save_pbm(img: &BinaryImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pbm(img)).map_err(|e| Error::io(path, e))
}
