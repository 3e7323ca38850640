//! Mini-batch training of a linear cost predictor under any loss.

mod adam;
mod model;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use model::LinearPredictor;

use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::DataSample;
use crate::error::{Error, Result};
use crate::evaluation::normalized_regret;
use crate::exec::Execution;
use crate::linalg::CompensatedSum;
use crate::losses::{Method, SolverCalls};
use crate::problems::{Oracle, ProblemKind};
use crate::seeds::{derive_seed, stream_rng};

const SHUFFLE_TAG: u64 = 0x5348_5546;
const LOSS_TAG: u64 = 0x4C4F_5353;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub method: Method,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    #[serde(default = "yes")]
    pub shuffle: bool,
    #[serde(skip)]
    pub exec: Execution,
}

fn yes() -> bool {
    true
}

impl TrainConfig {
    /// Defaults for `method` on `problem`: lr 0.01 (0.05 for TSP), 10 epochs
    /// (20 for two-stage), batch 32.
    pub fn new(method: Method, problem: ProblemKind, seed: u64) -> Self {
        let learning_rate = match problem {
            ProblemKind::ShortestPath { .. } => 0.01,
            ProblemKind::Tsp { .. } => 0.05,
        };
        let epochs = if matches!(method, Method::TwoStage) { 20 } else { 10 };
        Self {
            method,
            learning_rate,
            epochs,
            batch_size: 32,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            seed,
            shuffle: true,
            exec: Execution::default(),
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.adam_eps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate", "must be finite and nonnegative"));
        }
        if self.epochs < 1 {
            return Err(Error::config("epochs", "must be at least 1"));
        }
        if self.batch_size < 1 {
            return Err(Error::config("batch_size", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::config("beta", "Adam betas must lie in [0, 1)"));
        }
        if !(self.adam_eps > 0.0) {
            return Err(Error::config("adam_eps", "must be positive"));
        }
        self.method.validate()
    }
}

/// One row of `log.csv`. Counters and seconds are cumulative; seconds
/// exclude validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_regret: f64,
    pub qp_full: u64,
    pub qp_partial: u64,
    pub blp: u64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LinearPredictor,
    pub log: Vec<EpochRecord>,
    pub calls: SolverCalls,
    pub train_seconds: f64,
}

/// One sample's contribution to a batch gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGradient<'a> {
    pub index: usize,
    pub grad_c_hat: Vec<f64>,
    pub x: &'a [f64],
}

/// Averaged `(∂L/∂W, ∂L/∂b)` over a batch, with `∂L/∂W` row-major.
///
/// Contributions are sorted by sample index and accumulated with compensated
/// summation, so the result does not depend on the order they arrive in.
pub fn aggregate_batch_gradient(
    mut items: Vec<SampleGradient<'_>>,
    cost_dim: usize,
    feature_dim: usize,
) -> (Vec<f64>, Vec<f64>) {
    items.sort_by_key(|s| s.index);
    let mut gw = CompensatedSum::new(cost_dim * feature_dim);
    let mut gb = CompensatedSum::new(cost_dim);
    let mut outer = vec![0.0; cost_dim * feature_dim];
    for s in &items {
        for (j, &g) in s.grad_c_hat.iter().enumerate() {
            for (k, &xk) in s.x.iter().enumerate() {
                outer[j * feature_dim + k] = g * xk;
            }
        }
        gw.add(&outer);
        gb.add(&s.grad_c_hat);
    }
    let n = items.len().max(1) as f64;
    let scale = |v: Vec<f64>| v.into_iter().map(|x| x / n).collect::<Vec<_>>();
    (scale(gw.finish()), scale(gb.finish()))
}

/// Trains `model` on `data`. Validation regret (when `val` is given) is
/// recorded after every epoch; otherwise the column holds NaN.
pub fn train<O: Oracle + ?Sized>(
    mut model: LinearPredictor,
    data: &[DataSample],
    val: Option<&[DataSample]>,
    oracle: &O,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    let (d, p) = (model.cost_dim, model.feature_dim);
    if d != oracle.dim() {
        return Err(Error::DimensionMismatch {
            context: "model cost dimension",
            expected: oracle.dim(),
            got: d,
        });
    }
    let adam_cfg = config.adam();
    let mut w_state = AdamState::new(d * p);
    let mut b_state = AdamState::new(d);
    let mut calls = SolverCalls::default();
    let mut log = Vec::with_capacity(config.epochs);
    let mut seconds = 0.0;
    let method = config.method;

    let mut order: Vec<usize> = (0..data.len()).collect();
    for epoch in 1..=config.epochs {
        let started = Instant::now();
        if config.shuffle {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(derive_seed(config.seed, SHUFFLE_TAG), epoch as u64));
            order.sort_unstable();
            order.shuffle(&mut rng);
        }
        let loss_seed = derive_seed(derive_seed(config.seed, LOSS_TAG), epoch as u64);
        let mut loss_sum = CompensatedSum::new(1);

        for batch in order.chunks(config.batch_size) {
            let current = &model;
            let outputs = config.exec.map_indexed(batch.len(), |k| {
                let i = batch[k];
                let s = &data[i];
                let c_hat = current.predict(&s.x)?;
                let mut rng = stream_rng(loss_seed, i as u64);
                method.evaluate(&c_hat, &s.c, &s.w_star, &s.gen, oracle, &mut rng)
            });
            let mut items = Vec::with_capacity(batch.len());
            for (&i, out) in batch.iter().zip(outputs) {
                let out = out?;
                if !out.value.is_finite() {
                    return Err(Error::NonFinite { context: "loss value", sample: i });
                }
                if out.grad_c_hat.iter().any(|g| !g.is_finite()) {
                    return Err(Error::NonFinite { context: "loss gradient", sample: i });
                }
                calls += out.solver_calls;
                loss_sum.add(&[out.value]);
                items.push(SampleGradient {
                    index: i,
                    grad_c_hat: out.grad_c_hat,
                    x: &data[i].x,
                });
            }
            let (gw, gb) = aggregate_batch_gradient(items, d, p);
            adam_step(&mut w_state, &mut model.weights, &gw, &adam_cfg);
            adam_step(&mut b_state, &mut model.bias, &gb, &adam_cfg);
            if !model.is_finite() {
                return Err(Error::NonFinite {
                    context: "model parameters after update of batch starting",
                    sample: batch[0],
                });
            }
        }
        seconds += started.elapsed().as_secs_f64();

        let val_regret = match val {
            Some(v) => normalized_regret(&model, v, oracle, config.exec)?,
            None => f64::NAN,
        };
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum.finish()[0] / data.len() as f64,
            val_regret,
            qp_full: calls.qp_full,
            qp_partial: calls.qp_partial,
            blp: calls.blp,
            wall_seconds: seconds,
        };
        log::debug!(
            "{} epoch {epoch}: loss {:.6}, val regret {:.4}",
            method.id(),
            record.train_loss,
            record.val_regret
        );
        log.push(record);
    }
    Ok(TrainOutcome {
        model,
        log,
        calls,
        train_seconds: seconds,
    })
}

/// Writes the epoch log as CSV.
pub fn write_log(path: &Path, log: &[EpochRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in log {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregation_is_order_independent() {
        let xs: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 * 0.1 + 1e-9, 1e8, -3.0]).collect();
        let items: Vec<SampleGradient> = (0..5)
            .map(|i| SampleGradient {
                index: i,
                grad_c_hat: vec![1e-3 * i as f64, 1e12 - i as f64],
                x: &xs[i],
            })
            .collect();
        let mut rev = items.clone();
        rev.reverse();
        assert_eq!(
            aggregate_batch_gradient(items, 2, 3),
            aggregate_batch_gradient(rev, 2, 3)
        );
    }

    #[test]
    fn aggregation_averages_outer_products() {
        let x0 = [1.0, 2.0];
        let x1 = [3.0, -1.0];
        let items = vec![
            SampleGradient { index: 0, grad_c_hat: vec![1.0], x: &x0 },
            SampleGradient { index: 1, grad_c_hat: vec![2.0], x: &x1 },
        ];
        let (gw, gb) = aggregate_batch_gradient(items, 1, 2);
        assert_eq!(gw, vec![3.5, 0.0]);
        assert_eq!(gb, vec![1.5]);
    }

    #[test]
    fn config_defaults_follow_problem_and_method() {
        let sp: ProblemKind = "sp5".parse().unwrap();
        let tsp: ProblemKind = "tsp10".parse().unwrap();
        let c = TrainConfig::new(Method::TwoStage, sp, 0);
        assert_eq!((c.learning_rate, c.epochs, c.batch_size), (0.01, 20, 32));
        let c = TrainConfig::new(Method::SpoPlus, tsp, 0);
        assert_eq!((c.learning_rate, c.epochs), (0.05, 10));
        let mut bad = c.clone();
        bad.batch_size = 0;
        assert!(bad.validate().is_err());
    }
}
