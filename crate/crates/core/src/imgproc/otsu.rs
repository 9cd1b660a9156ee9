use super::{BinaryImage, GrayImage};

/// Between-class variance (scaled by N²) of the split `intensity < t` vs
/// `intensity >= t`. Zero when either class is empty.
pub fn between_class_variance(hist: &[u64; 256], t: u8) -> f64 {
    let (mut n0, mut s0) = (0u128, 0u128);
    for (v, &count) in hist.iter().enumerate().take(t as usize) {
        n0 += count as u128;
        s0 += count as u128 * v as u128;
    }
    let n: u128 = hist.iter().map(|&c| c as u128).sum();
    let s: u128 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| c as u128 * v as u128)
        .sum();
    split_variance(n0, s0, n, s)
}

// n0 * n1 * (mu0 - mu1)^2 == (s0 * n - n0 * s)^2 / (n0 * n1); the difference
// is exact in i128 before the single rounding to f64.
fn split_variance(n0: u128, s0: u128, n: u128, s: u128) -> f64 {
    let n1 = n - n0;
    if n0 == 0 || n1 == 0 {
        return 0.0;
    }
    let diff = (s0 * n) as i128 - (n0 * s) as i128;
    let diff = diff as f64;
    diff * diff / (n0 as f64 * n1 as f64)
}

/// Otsu binarization with dark ink: a pixel is foreground iff its intensity
/// is below the returned threshold. Ties go to the lowest threshold, so a
/// constant image yields threshold 0 and no foreground.
pub fn otsu_threshold(img: &GrayImage) -> (u8, BinaryImage) {
    let hist = img.histogram();
    let n: u128 = hist.iter().map(|&c| c as u128).sum();
    let s: u128 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| c as u128 * v as u128)
        .sum();

    let (mut best_t, mut best_var) = (0u8, 0.0f64);
    let (mut n0, mut s0) = (0u128, 0u128);
    for t in 0..=255u8 {
        // class 0 holds intensities strictly below t
        if t > 0 {
            let v = (t - 1) as usize;
            n0 += hist[v] as u128;
            s0 += hist[v] as u128 * v as u128;
        }
        let var = split_variance(n0, s0, n, s);
        if var > best_var {
            best_var = var;
            best_t = t;
        }
    }

    let pixels = img.pixels().iter().map(|&p| p < best_t).collect();
    let out = BinaryImage::new(img.width(), img.height(), pixels)
        .expect("dimensions copied from a valid image");
    (best_t, out)
}
