//! Zhang–Suen thinning.
//!
//! Each subiteration marks candidates in parallel, as in the original
//! algorithm, but commits them one at a time and re-tests every candidate
//! against the already-updated raster. Plain parallel deletion erases 2×2
//! blocks and two-pixel diagonals outright; with the re-test every deletion
//! removes a simple point, so the number of 8-connected components is kept.

use super::{BinaryImage, SkeletonImage};

// Neighbours P2..P9, clockwise from north.
const RING: [(i64, i64); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

fn neighbours(img: &BinaryImage, x: usize, y: usize) -> [bool; 8] {
    let mut out = [false; 8];
    for (slot, (dx, dy)) in out.iter_mut().zip(RING) {
        *slot = img.get_signed(x as i64 + dx, y as i64 + dy);
    }
    out
}

fn deletable(img: &BinaryImage, x: usize, y: usize, first_pass: bool) -> bool {
    if !img.get(x, y) {
        return false;
    }
    let p = neighbours(img, x, y);
    let b = p.iter().filter(|&&v| v).count();
    if !(2..=6).contains(&b) {
        return false;
    }
    let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
    if a != 1 {
        return false;
    }
    let (p2, p4, p6, p8) = (p[0], p[2], p[4], p[6]);
    if first_pass {
        !(p2 && p4 && p6) && !(p4 && p6 && p8)
    } else {
        !(p2 && p4 && p8) && !(p2 && p6 && p8)
    }
}

fn subiteration(img: &mut BinaryImage, first_pass: bool) -> bool {
    let marked: Vec<(usize, usize)> = (0..img.height())
        .flat_map(|y| (0..img.width()).map(move |x| (x, y)))
        .filter(|&(x, y)| deletable(img, x, y, first_pass))
        .collect();
    let mut changed = false;
    for (x, y) in marked {
        if deletable(img, x, y, first_pass) {
            img.set(x, y, false);
            changed = true;
        }
    }
    changed
}

/// Thins to convergence. The result is a fixed point: thinning it again
/// changes nothing.
pub fn thin(img: &BinaryImage) -> SkeletonImage {
    let mut work = img.clone();
    loop {
        let a = subiteration(&mut work, true);
        let b = subiteration(&mut work, false);
        if !a && !b {
            break;
        }
    }
    SkeletonImage::assume_thin(work)
}
