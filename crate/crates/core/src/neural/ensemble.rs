use serde::{Deserialize, Serialize};

use super::{mlp_train, rbf_train, FitMetrics, MlpModel, RbfModel, Sample, TrainConfig, TrainLog};
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutDecision {
    Valid,
    Invalid,
}

/// MLP and RBF members combined by a simple average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub mlp: MlpModel,
    pub rbf: RbfModel,
    pub threshold: f64,
}

impl EnsembleModel {
    pub fn new(mlp: MlpModel, rbf: RbfModel) -> Result<Self> {
        if mlp.input_dim() != rbf.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: mlp.input_dim(),
                actual: rbf.input_dim(),
            });
        }
        Ok(EnsembleModel {
            mlp,
            rbf,
            threshold: DEFAULT_THRESHOLD,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.mlp.input_dim()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let a = self.mlp.forward(x)?;
        let b = self.rbf.forward(x)?;
        Ok((a + b) / 2.0)
    }

    /// Valid iff the averaged score reaches the threshold (ties are valid).
    pub fn classify(&self, x: &[f64]) -> Result<CutDecision> {
        Ok(self.decide(self.predict(x)?))
    }

    pub fn decide(&self, score: f64) -> CutDecision {
        if score >= self.threshold {
            CutDecision::Valid
        } else {
            CutDecision::Invalid
        }
    }

    pub fn fit_metrics(&self, data: &[Sample]) -> Result<FitMetrics> {
        let y = data.iter().map(|s| self.predict(&s.features)).collect::<Result<Vec<_>>>()?;
        let x: Vec<f64> = data.iter().map(|s| s.label).collect();
        FitMetrics::compute(&y, &x)
    }
}

/// Trains both members on `train` and reports fit on `train` and, if given,
/// `held_out`.
pub fn train_ensemble(
    train: &[Sample],
    held_out: Option<&[Sample]>,
    cfg: &TrainConfig,
) -> Result<(EnsembleModel, TrainLog)> {
    let (mlp, mlp_log) = mlp_train(train, cfg)?;
    let (rbf, rbf_log) = rbf_train(train, cfg)?;
    let model = EnsembleModel::new(mlp, rbf)?;
    let log = TrainLog {
        mlp_mse: mlp_log.mlp_mse,
        rbf_mse: rbf_log.rbf_mse,
        train: Some(model.fit_metrics(train)?),
        held_out: match held_out {
            Some(h) if !h.is_empty() => Some(model.fit_metrics(h)?),
            _ => None,
        },
    };
    Ok((model, log))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed(mlp_bias: f64, rbf_bias: f64) -> EnsembleModel {
        // a 1-hidden-unit net with zero weights outputs sigmoid(bias)
        let mlp = MlpModel::from_parts(&[1, 1, 1], vec![vec![vec![0.0]], vec![vec![0.0]]], vec![vec![0.0], vec![mlp_bias]])
            .unwrap();
        let rbf = RbfModel::new(vec![vec![0.0]], vec![1.0], vec![0.0], rbf_bias).unwrap();
        EnsembleModel::new(mlp, rbf).unwrap()
    }

    fn logit(p: f64) -> f64 {
        (p / (1.0 - p)).ln()
    }

    #[test]
    fn averages_members() {
        let e = fixed(logit(0.8), 0.6);
        assert!((e.predict(&[0.0]).unwrap() - 0.7).abs() < 1e-12);
        let same = fixed(logit(0.3), 0.3);
        assert!((same.predict(&[1.0]).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn threshold_rule() {
        let e = fixed(0.0, 0.0);
        assert_eq!(e.decide(0.7), CutDecision::Valid);
        assert_eq!(e.decide(0.5), CutDecision::Valid);
        assert_eq!(e.decide(0.49), CutDecision::Invalid);
        assert!(e.classify(&[0.0, 1.0]).is_err());
    }
}
