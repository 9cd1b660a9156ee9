//! Single-hidden-layer perceptron with logistic units, trained by online
//! backpropagation with momentum.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_dim, check_rows, sigmoid, Sample, TrainConfig, TrainLog};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    layer_sizes: [usize; 3],
    /// `weights[l][j][i]`: from unit `i` of layer `l` to unit `j` of layer `l + 1`.
    weights: Vec<Vec<Vec<f64>>>,
    biases: Vec<Vec<f64>>,
}

/// Gradient of the per-sample loss `0.5 * (output - target)^2`, shaped like
/// the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpModel {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        let sizes = [input_dim, hidden, 1];
        MlpModel {
            layer_sizes: sizes,
            weights: (0..2)
                .map(|l| vec![vec![0.0; sizes[l]]; sizes[l + 1]])
                .collect(),
            biases: (0..2).map(|l| vec![0.0; sizes[l + 1]]).collect(),
        }
    }

    /// Uniform initialization in `[-0.5, 0.5]`.
    pub fn random(input_dim: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let mut m = Self::zeros(input_dim, hidden);
        for l in 0..2 {
            for row in &mut m.weights[l] {
                for w in row.iter_mut() {
                    *w = rng.gen_range(-0.5..=0.5);
                }
            }
            for b in &mut m.biases[l] {
                *b = rng.gen_range(-0.5..=0.5);
            }
        }
        m
    }

    pub fn from_parts(
        layer_sizes: &[usize],
        weights: Vec<Vec<Vec<f64>>>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let sizes: [usize; 3] = layer_sizes.try_into().map_err(|_| {
            Error::CorruptModel(format!(
                "expected 3 layer sizes (one hidden layer), got {}",
                layer_sizes.len()
            ))
        })?;
        if sizes[2] != 1 || sizes[0] == 0 || sizes[1] == 0 {
            return Err(Error::CorruptModel(format!("bad layer sizes {sizes:?}")));
        }
        let shape_ok = weights.len() == 2
            && biases.len() == 2
            && (0..2).all(|l| {
                weights[l].len() == sizes[l + 1]
                    && weights[l].iter().all(|row| row.len() == sizes[l])
                    && biases[l].len() == sizes[l + 1]
            });
        if !shape_ok {
            return Err(Error::CorruptModel("weight shapes do not match layer sizes".into()));
        }
        let finite = weights.iter().flatten().flatten().chain(biases.iter().flatten()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::CorruptModel("non-finite parameter".into()));
        }
        Ok(MlpModel {
            layer_sizes: sizes,
            weights,
            biases,
        })
    }

    pub fn layer_sizes(&self) -> &[usize; 3] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn weights(&self) -> &[Vec<Vec<f64>>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn weight_mut(&mut self, layer: usize, to: usize, from: usize) -> &mut f64 {
        &mut self.weights[layer][to][from]
    }

    pub fn bias_mut(&mut self, layer: usize, unit: usize) -> &mut f64 {
        &mut self.biases[layer][unit]
    }

    // Activations of every layer, input included.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![x.to_vec()];
        for l in 0..2 {
            let prev = &acts[l];
            let next = self.weights[l]
                .iter()
                .zip(&self.biases[l])
                .map(|(row, b)| sigmoid(row.iter().zip(prev).map(|(w, a)| w * a).sum::<f64>() + b))
                .collect();
            acts.push(next);
        }
        acts
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.input_dim(), x)?;
        Ok(self.activations(x)[2][0])
    }

    /// `0.5 * (output - target)^2`.
    pub fn loss(&self, x: &[f64], target: f64) -> Result<f64> {
        let y = self.forward(x)?;
        Ok(0.5 * (y - target) * (y - target))
    }

    pub fn gradient(&self, x: &[f64], target: f64) -> Result<MlpGradient> {
        check_dim(self.input_dim(), x)?;
        let acts = self.activations(x);
        let y = acts[2][0];
        let delta_out = vec![(y - target) * y * (1.0 - y)];
        let delta_hidden: Vec<f64> = (0..self.layer_sizes[1])
            .map(|j| {
                let h = acts[1][j];
                self.weights[1][0][j] * delta_out[0] * h * (1.0 - h)
            })
            .collect();
        let deltas = [delta_hidden, delta_out];
        let weights = (0..2)
            .map(|l| {
                deltas[l]
                    .iter()
                    .map(|d| acts[l].iter().map(|a| d * a).collect())
                    .collect()
            })
            .collect();
        let biases = deltas.to_vec();
        Ok(MlpGradient { weights, biases })
    }

    pub fn mse(&self, data: &[Sample]) -> Result<f64> {
        let mut total = 0.0;
        for s in data {
            let e = self.forward(&s.features)? - s.label;
            total += e * e;
        }
        Ok(total / data.len() as f64)
    }
}

/// Trains from a `[-0.5, 0.5]` uniform start drawn from `cfg.rng_seed`.
/// Samples are visited in a fresh seeded shuffle each epoch; training stops
/// once the epoch MSE reaches `cfg.target_mse` or after `cfg.max_epochs`.
pub fn mlp_train(data: &[Sample], cfg: &TrainConfig) -> Result<(MlpModel, TrainLog)> {
    cfg.validate()?;
    let dim = check_rows(data)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut model = MlpModel::random(dim, cfg.hidden, &mut rng);
    let mut velocity = MlpGradient {
        weights: model.weights.iter().map(|l| l.iter().map(|r| vec![0.0; r.len()]).collect()).collect(),
        biases: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
    };

    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut log = TrainLog::default();
    for _ in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let grad = model.gradient(&data[i].features, data[i].label)?;
            for l in 0..2 {
                for (j, row) in grad.weights[l].iter().enumerate() {
                    for (k, g) in row.iter().enumerate() {
                        let v = &mut velocity.weights[l][j][k];
                        *v = cfg.momentum * *v - cfg.learning_rate * g;
                        model.weights[l][j][k] += *v;
                    }
                }
                for (j, g) in grad.biases[l].iter().enumerate() {
                    let v = &mut velocity.biases[l][j];
                    *v = cfg.momentum * *v - cfg.learning_rate * g;
                    model.biases[l][j] += *v;
                }
            }
        }
        let mse = model.mse(data)?;
        log.mlp_mse.push(mse);
        if mse <= cfg.target_mse {
            break;
        }
    }
    Ok((model, log))
}
