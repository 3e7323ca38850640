use rand::distr::Uniform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dot;

/// Affine cost predictor `ĉ = Wx + b` with `W` stored row-major (`d × p`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPredictor {
    pub cost_dim: usize,
    pub feature_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LinearPredictor {
    pub fn zeros(cost_dim: usize, feature_dim: usize) -> Self {
        Self {
            cost_dim,
            feature_dim,
            weights: vec![0.0; cost_dim * feature_dim],
            bias: vec![0.0; cost_dim],
        }
    }

    /// Every parameter drawn from `U(−1/√p, 1/√p)`, weights first.
    pub fn init<R: Rng + ?Sized>(cost_dim: usize, feature_dim: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (feature_dim as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
        let weights = (0..cost_dim * feature_dim).map(|_| rng.sample(dist)).collect();
        let bias = (0..cost_dim).map(|_| rng.sample(dist)).collect();
        Self {
            cost_dim,
            feature_dim,
            weights,
            bias,
        }
    }

    /// [`init`](Self::init) driven by a ChaCha8 stream seeded with `seed`.
    pub fn seeded(cost_dim: usize, feature_dim: usize, seed: u64) -> Self {
        Self::init(cost_dim, feature_dim, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn from_parts(weights: Vec<Vec<f64>>, bias: Vec<f64>) -> Result<Self> {
        let cost_dim = bias.len();
        let feature_dim = weights.first().map_or(0, |r| r.len());
        if weights.len() != cost_dim {
            return Err(Error::DimensionMismatch {
                context: "weight rows",
                expected: cost_dim,
                got: weights.len(),
            });
        }
        if let Some(r) = weights.iter().find(|r| r.len() != feature_dim) {
            return Err(Error::DimensionMismatch {
                context: "weight row length",
                expected: feature_dim,
                got: r.len(),
            });
        }
        Ok(Self {
            cost_dim,
            feature_dim,
            weights: weights.concat(),
            bias,
        })
    }

    pub fn weight_row(&self, j: usize) -> &[f64] {
        &self.weights[j * self.feature_dim..(j + 1) * self.feature_dim]
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.feature_dim {
            return Err(Error::DimensionMismatch {
                context: "feature vector",
                expected: self.feature_dim,
                got: x.len(),
            });
        }
        Ok((0..self.cost_dim)
            .map(|j| dot(self.weight_row(j), x) + self.bias[j])
            .collect())
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }
}
