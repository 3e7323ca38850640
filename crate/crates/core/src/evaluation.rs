//! Regret metrics and the multi-seed comparison harness.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::datagen::{generate_with, DataSample, GenConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::dot;
use crate::losses::{Method, MethodId, SolverCalls};
use crate::problems::{Oracle, ProblemKind};
use crate::seeds::derive_seed;
use crate::training::{train, EpochRecord, LinearPredictor, TrainConfig};

const DATA_TAG: u64 = 1;
const INIT_TAG: u64 = 2;
const TRAIN_TAG: u64 = 3;

/// `c·(w*(ĉ) − w*(c))` given the cached optimum `z* = c·w*(c)`.
pub fn regret<O: Oracle + ?Sized>(c_hat: &[f64], c_true: &[f64], z_star: f64, oracle: &O) -> Result<f64> {
    let w = oracle.solve(c_hat)?;
    let r = dot(c_true, &w) - z_star;
    if r < -1e-9 * (1.0 + z_star.abs()) {
        return Err(Error::Internal(format!(
            "negative regret {r}: cached solution is not optimal"
        )));
    }
    Ok(r.max(0.0))
}

/// `Σ regretᵢ / Σ |zᵢ*|` of the model's predictions over `samples`.
pub fn normalized_regret<O: Oracle + ?Sized>(
    model: &LinearPredictor,
    samples: &[DataSample],
    oracle: &O,
    exec: Execution,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("cannot evaluate regret on an empty set".into()));
    }
    let regrets = exec.map_indexed(samples.len(), |i| {
        let s = &samples[i];
        regret(&model.predict(&s.x)?, &s.c, s.z_star, oracle)
    });
    let mut total = 0.0;
    for r in regrets {
        total += r?;
    }
    let denom: f64 = samples.iter().map(|s| s.z_star.abs()).sum();
    if denom == 0.0 {
        return Err(Error::InvalidInput("optimal objectives sum to zero".into()));
    }
    Ok(total / denom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub deg: u32,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub seeds: usize,
    pub root_seed: u64,
    pub methods: Vec<MethodId>,
    #[serde(default = "default_noise")]
    pub noise_half_width: f64,
    /// Overrides the per-problem default.
    #[serde(default)]
    pub learning_rate: Option<f64>,
    /// Overrides the per-method default.
    #[serde(default)]
    pub epochs: Option<usize>,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(skip)]
    pub exec: Execution,
}

fn default_noise() -> f64 {
    0.5
}

fn default_batch() -> usize {
    32
}

impl ExperimentConfig {
    pub fn new(problem: ProblemKind, deg: u32, methods: Vec<MethodId>) -> Self {
        Self {
            problem,
            deg,
            n_train: 1000,
            n_val: 1000,
            n_test: 1000,
            seeds: 5,
            root_seed: 0,
            methods,
            noise_half_width: default_noise(),
            learning_rate: None,
            epochs: None,
            batch_size: default_batch(),
            exec: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method is required"));
        }
        if self.n_train < 1 || self.n_test < 1 {
            return Err(Error::config("n_train", "train and test sets need at least one sample"));
        }
        if self.seeds < 1 {
            return Err(Error::config("seeds", "must be at least 1"));
        }
        GenConfig {
            problem: self.problem,
            n_samples: self.n_train + self.n_val + self.n_test,
            deg: self.deg,
            noise_half_width: self.noise_half_width,
            seed: 0,
        }
        .validate()?;
        for &m in &self.methods {
            self.train_config(m, 0).validate()?;
        }
        Ok(())
    }

    pub fn train_config(&self, method: MethodId, seed: u64) -> TrainConfig {
        let mut cfg = TrainConfig::new(Method::from_id(method), self.problem, seed);
        if let Some(lr) = self.learning_rate {
            cfg.learning_rate = lr;
        }
        if let Some(e) = self.epochs {
            cfg.epochs = e;
        }
        cfg.batch_size = self.batch_size;
        cfg.exec = self.exec;
        cfg
    }

    /// Seed of run `k`, derived from the root seed.
    pub fn run_seed(&self, k: usize) -> u64 {
        derive_seed(self.root_seed, k as u64)
    }
}

/// One (method, seed) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: MethodId,
    pub seed: u64,
    /// Normalized test regret as a fraction; NaN if the run failed.
    pub regret: f64,
    pub train_seconds: f64,
    pub calls: SolverCalls,
    pub log: Vec<EpochRecord>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub method: MethodId,
    pub runs: usize,
    pub regret_mean: f64,
    pub regret_std: f64,
    pub seconds_mean: f64,
    pub seconds_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub runs: Vec<RunRecord>,
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

impl ExperimentReport {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn runs_of(&self, method: MethodId) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(move |r| r.method == method)
    }

    /// Aggregates over successful runs, in configured method order.
    pub fn summaries(&self) -> Vec<Summary> {
        self.config
            .methods
            .iter()
            .map(|&m| {
                let ok: Vec<&RunRecord> = self.runs_of(m).filter(|r| r.error.is_none()).collect();
                let regrets: Vec<f64> = ok.iter().map(|r| r.regret).collect();
                let secs: Vec<f64> = ok.iter().map(|r| r.train_seconds).collect();
                let (regret_mean, regret_std) = mean_std(&regrets);
                let (seconds_mean, seconds_std) = mean_std(&secs);
                Summary {
                    method: m,
                    runs: ok.len(),
                    regret_mean,
                    regret_std,
                    seconds_mean,
                    seconds_std,
                }
            })
            .collect()
    }

    pub fn summary(&self, method: MethodId) -> Option<Summary> {
        self.summaries().into_iter().find(|s| s.method == method)
    }

    pub fn to_markdown(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# {} (deg {}), {} train / {} test, {} seed(s)\n",
            c.problem, c.deg, c.n_train, c.n_test, c.seeds
        );
        out.push_str("| Method | Regret (%) | Time (s) |\n|---|---|---|\n");
        for s in self.summaries() {
            let _ = writeln!(
                out,
                "| {} | {:.2} ± {:.2} | {:.3} ± {:.3} |",
                s.method,
                100.0 * s.regret_mean,
                100.0 * s.regret_std,
                s.seconds_mean,
                s.seconds_std
            );
        }
        let failed: Vec<&RunRecord> = self.runs.iter().filter(|r| r.error.is_some()).collect();
        if !failed.is_empty() {
            out.push_str("\nFailed runs:\n\n");
            for r in failed {
                let _ = writeln!(out, "- {} seed {}: {}", r.method, r.seed, r.error.as_deref().unwrap_or(""));
            }
        }
        out
    }

    /// Writes `report.csv` and `report.md` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("report.csv"))?;
        w.write_record([
            "method", "seed", "regret_pct", "train_seconds", "qp_full", "qp_partial", "blp", "error",
        ])?;
        for r in &self.runs {
            w.write_record([
                r.method.to_string(),
                r.seed.to_string(),
                format!("{}", 100.0 * r.regret),
                format!("{}", r.train_seconds),
                r.calls.qp_full.to_string(),
                r.calls.qp_partial.to_string(),
                r.calls.blp.to_string(),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        fs::write(dir.join("report.md"), self.to_markdown())?;
        Ok(())
    }
}

/// Trains and evaluates every configured method for every seed.
///
/// Per seed, one dataset of `n_train + n_val + n_test` samples is generated
/// (so all splits share the feature map) and split in that order. All
/// methods start from the same initial model. Failures are recorded in the
/// affected cell only, except data-generation failures, which abort.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let problem = config.problem.build()?;
    let mut runs = Vec::with_capacity(config.seeds * config.methods.len());
    for k in 0..config.seeds {
        let seed = config.run_seed(k);
        let gen = GenConfig {
            problem: config.problem,
            n_samples: config.n_train + config.n_val + config.n_test,
            deg: config.deg,
            noise_half_width: config.noise_half_width,
            seed: derive_seed(seed, DATA_TAG),
        };
        let data = generate_with(&gen, config.exec)?.samples;
        let (train_set, rest) = data.split_at(config.n_train);
        let (val_set, test_set) = rest.split_at(config.n_val);
        let val = (!val_set.is_empty()).then_some(val_set);
        let init = LinearPredictor::seeded(
            problem.dim(),
            config.problem.feature_dim(),
            derive_seed(seed, INIT_TAG),
        );

        for &method in &config.methods {
            let tc = config.train_config(method, derive_seed(seed, TRAIN_TAG));
            let started = Instant::now();
            let outcome = train(init.clone(), train_set, val, &problem, &tc).and_then(|o| {
                let r = normalized_regret(&o.model, test_set, &problem, config.exec)?;
                Ok((o, r))
            });
            let record = match outcome {
                Ok((o, r)) => RunRecord {
                    method,
                    seed,
                    regret: r,
                    train_seconds: o.train_seconds,
                    calls: o.calls,
                    log: o.log,
                    error: None,
                },
                Err(e) => {
                    let mut msg = e.to_string();
                    let mut src = std::error::Error::source(&e);
                    while let Some(cause) = src {
                        msg.push_str(&format!(": {cause}"));
                        src = cause.source();
                    }
                    log::error!("{method} seed {seed} failed: {msg}");
                    RunRecord {
                        method,
                        seed,
                        regret: f64::NAN,
                        train_seconds: started.elapsed().as_secs_f64(),
                        calls: SolverCalls::default(),
                        log: Vec::new(),
                        error: Some(msg),
                    }
                }
            };
            log::info!(
                "{} seed {}: regret {:.2}% in {:.2}s",
                method,
                k,
                100.0 * record.regret,
                record.train_seconds
            );
            runs.push(record);
        }
    }
    Ok(ExperimentReport {
        config: config.clone(),
        runs,
    })
}
