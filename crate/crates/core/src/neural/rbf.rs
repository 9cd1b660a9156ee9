//! Gaussian radial-basis network: k-means centers, nearest-center widths and
//! ridge least-squares output weights.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linalg::solve;
use super::{check_dim, check_rows, Sample, TrainConfig, TrainLog};
use crate::error::{Error, Result};

const KMEANS_MAX_ITERS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfModel {
    centers: Vec<Vec<f64>>,
    widths: Vec<f64>,
    output_weights: Vec<f64>,
    bias: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl RbfModel {
    pub fn new(centers: Vec<Vec<f64>>, widths: Vec<f64>, output_weights: Vec<f64>, bias: f64) -> Result<Self> {
        let dim = centers.first().map(Vec::len).ok_or_else(|| Error::CorruptModel("no RBF centers".into()))?;
        if dim == 0 || centers.iter().any(|c| c.len() != dim) {
            return Err(Error::CorruptModel("ragged RBF centers".into()));
        }
        if widths.len() != centers.len() || output_weights.len() != centers.len() {
            return Err(Error::CorruptModel("RBF widths/weights do not match centers".into()));
        }
        if widths.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::CorruptModel("RBF widths must be positive".into()));
        }
        let finite = centers.iter().flatten().chain(&output_weights).all(|v| v.is_finite()) && bias.is_finite();
        if !finite {
            return Err(Error::CorruptModel("non-finite RBF parameter".into()));
        }
        Ok(RbfModel {
            centers,
            widths,
            output_weights,
            bias,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.centers[0].len()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn output_weights(&self) -> &[f64] {
        &self.output_weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    fn kernels(&self, x: &[f64]) -> impl Iterator<Item = f64> + '_ {
        let x = x.to_vec();
        self.centers
            .iter()
            .zip(&self.widths)
            .map(move |(c, w)| (-sq_dist(&x, c) / (2.0 * w * w)).exp())
    }

    /// Unclamped kernel sum plus bias.
    pub fn raw_output(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.input_dim(), x)?;
        Ok(self.kernels(x).zip(&self.output_weights).map(|(k, w)| k * w).sum::<f64>() + self.bias)
    }

    /// Network output clamped to `[0, 1]`.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        Ok(self.raw_output(x)?.clamp(0.0, 1.0))
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

/// Lloyd's k-means from `k` distinct seeded rows. Stops when assignments
/// settle or after 50 iterations; an emptied cluster keeps its center.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if points.is_empty() {
        return Err(Error::EmptyData);
    }
    if k == 0 || k > points.len() {
        return Err(Error::TooManyCenters {
            centers: k,
            rows: points.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut init: Vec<usize> = sample(&mut rng, points.len(), k).into_vec();
    init.sort_unstable();
    let mut centers: Vec<Vec<f64>> = init.iter().map(|&i| points[i].clone()).collect();

    let dim = points[0].len();
    let mut assignment = vec![usize::MAX; points.len()];
    for _ in 0..KMEANS_MAX_ITERS {
        let mut changed = false;
        for (p, slot) in points.iter().zip(assignment.iter_mut()) {
            let nearest = centers
                .iter()
                .enumerate()
                .map(|(c, center)| (c, sq_dist(p, center)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(c, _)| c)
                .expect("k >= 1");
            if *slot != nearest {
                *slot = nearest;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    Ok(centers)
}

// Mean distance to the two nearest other centers; 1.0 when alone or when
// centers coincide.
fn center_widths(centers: &[Vec<f64>]) -> Vec<f64> {
    if centers.len() == 1 {
        return vec![1.0];
    }
    centers
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut d: Vec<f64> = centers
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, o)| sq_dist(c, o).sqrt())
                .collect();
            d.sort_by(f64::total_cmp);
            let take = d.len().min(2);
            let w = d[..take].iter().sum::<f64>() / take as f64;
            if w > 0.0 {
                w
            } else {
                1.0
            }
        })
        .collect()
}

/// Fits an RBF network with `cfg.rbf_centers` k-means centers. Output weights
/// and bias solve `(ΦᵀΦ + ridge·I) w = Φᵀy` over the kernel design matrix Φ.
pub fn rbf_train(data: &[Sample], cfg: &TrainConfig) -> Result<(RbfModel, TrainLog)> {
    cfg.validate()?;
    check_rows(data)?;
    if cfg.rbf_centers > data.len() {
        return Err(Error::TooManyCenters {
            centers: cfg.rbf_centers,
            rows: data.len(),
        });
    }

    let model = if data.len() == 1 {
        RbfModel::new(vec![data[0].features.clone()], vec![1.0], vec![0.0], data[0].label)?
    } else {
        let points: Vec<Vec<f64>> = data.iter().map(|s| s.features.clone()).collect();
        let centers = kmeans(&points, cfg.rbf_centers, cfg.rng_seed)?;
        let widths = center_widths(&centers);
        let shell = RbfModel::new(centers, widths, vec![0.0; cfg.rbf_centers], 0.0)?;

        let k = cfg.rbf_centers + 1;
        let mut gram = vec![vec![0.0; k]; k];
        let mut rhs = vec![0.0; k];
        for s in data {
            let mut phi: Vec<f64> = shell.kernels(&s.features).collect();
            phi.push(1.0);
            for i in 0..k {
                rhs[i] += phi[i] * s.label;
                for j in 0..k {
                    gram[i][j] += phi[i] * phi[j];
                }
            }
        }
        for (i, row) in gram.iter_mut().enumerate() {
            row[i] += cfg.rbf_ridge;
        }
        let mut w = solve(&gram, &rhs)?;
        let bias = w.pop().expect("bias term");
        RbfModel { output_weights: w, bias, ..shell }
    };

    let log = TrainLog {
        rbf_mse: vec![model.mse(data)?],
        ..TrainLog::default()
    };
    Ok((model, log))
}
