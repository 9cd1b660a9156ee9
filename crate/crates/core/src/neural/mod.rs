//! MLP and RBF networks, their averaging ensemble, and regression metrics.

mod ensemble;
mod linalg;
mod metrics;
mod mlp;
mod model_io;
mod rbf;

pub use ensemble::{train_ensemble, CutDecision, EnsembleModel};
pub use linalg::solve;
pub use metrics::{corr_r, rmse, scatter_index, FitMetrics};
pub use mlp::{mlp_train, MlpGradient, MlpModel};
pub use model_io::{load_model, model_from_json, model_to_json, save_model, MODEL_FORMAT_VERSION};
pub use rbf::{kmeans, rbf_train, RbfModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One labeled training row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    /// 1.0 for a valid cut, 0.0 for an invalid one.
    pub label: f64,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: f64) -> Self {
        Sample { features, label }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub max_epochs: usize,
    pub target_mse: f64,
    pub rng_seed: u64,
    pub hidden: usize,
    pub rbf_centers: usize,
    pub rbf_ridge: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            momentum: 0.9,
            max_epochs: 2000,
            target_mse: 0.01,
            rng_seed: 0,
            hidden: 16,
            rbf_centers: 20,
            rbf_ridge: 1e-6,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter("learning_rate must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidParameter("momentum must be in [0, 1)".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidParameter("max_epochs must be >= 1".into()));
        }
        if self.hidden == 0 {
            return Err(Error::InvalidParameter("hidden must be >= 1".into()));
        }
        if self.rbf_centers == 0 {
            return Err(Error::InvalidParameter("rbf_centers must be >= 1".into()));
        }
        if !(self.rbf_ridge >= 0.0) {
            return Err(Error::InvalidParameter("rbf_ridge must be >= 0".into()));
        }
        Ok(())
    }
}

/// Per-epoch training error of each member plus end-of-training fit.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainLog {
    pub mlp_mse: Vec<f64>,
    /// The RBF is fitted in closed form, so this holds one entry.
    pub rbf_mse: Vec<f64>,
    pub train: Option<FitMetrics>,
    pub held_out: Option<FitMetrics>,
}

pub(crate) fn check_rows(data: &[Sample]) -> Result<usize> {
    let first = data.first().ok_or(Error::EmptyData)?;
    let dim = first.features.len();
    for s in data {
        if s.features.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: s.features.len(),
            });
        }
    }
    Ok(dim)
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: x.len(),
        });
    }
    Ok(())
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}
