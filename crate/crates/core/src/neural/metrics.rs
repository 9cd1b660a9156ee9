//! Fit statistics between attained outputs `y` and targets `x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub rmse: f64,
    /// `None` when either series is constant.
    pub r: Option<f64>,
    /// `None` when the target mean is zero.
    pub si: Option<f64>,
}

impl FitMetrics {
    pub fn compute(y: &[f64], x: &[f64]) -> Result<Self> {
        Ok(FitMetrics {
            rmse: rmse(y, x)?,
            r: corr_r(y, x).ok(),
            si: scatter_index(y, x).ok(),
        })
    }
}

fn check(y: &[f64], x: &[f64]) -> Result<()> {
    if y.len() != x.len() {
        return Err(Error::LengthMismatch(y.len(), x.len()));
    }
    if y.is_empty() {
        return Err(Error::EmptyData);
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `sqrt(Σ (yᵢ − xᵢ)² / N)`.
pub fn rmse(y: &[f64], x: &[f64]) -> Result<f64> {
    check(y, x)?;
    let sum: f64 = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((sum / y.len() as f64).sqrt())
}

/// Pearson correlation. Undefined for constant series.
pub fn corr_r(y: &[f64], x: &[f64]) -> Result<f64> {
    check(y, x)?;
    if y.len() < 2 {
        return Err(Error::UndefinedMetric("correlation needs at least two points"));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in y.iter().zip(x) {
        let (dx, dy) = (b - mx, a - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedMetric("correlation of a constant series"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// RMSE divided by the target mean.
pub fn scatter_index(y: &[f64], x: &[f64]) -> Result<f64> {
    let e = rmse(y, x)?;
    let mx = mean(x);
    if mx == 0.0 {
        return Err(Error::UndefinedMetric("scatter index with zero target mean"));
    }
    Ok(e / mx)
}
