use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use conealign::datagen::{generate_with, read_dataset, write_dataset, Dataset, GenConfig};
use conealign::evaluation::{normalized_regret, run_experiment, ExperimentConfig};
use conealign::exec::Execution;
use conealign::losses::{Method, MethodId};
use conealign::problems::{Oracle, ProblemKind};
use conealign::training::{train, write_log, LinearPredictor, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::config::{pick, require, ConfigError, FileConfig};
use crate::{BenchmarkArgs, EvalArgs, GenerateArgs, TrainArgs};

fn parse_problem(s: &str) -> anyhow::Result<ProblemKind> {
    Ok(s.parse::<ProblemKind>()?)
}

fn parse_method(s: &str, field: &str) -> anyhow::Result<MethodId> {
    s.parse::<MethodId>().map_err(|_| {
        let known: Vec<&str> = MethodId::ALL.iter().map(|m| m.as_str()).collect();
        ConfigError(format!(
            "invalid configuration: field `{field}`: unknown method `{s}` (expected one of {})",
            known.join(", ")
        ))
        .into()
    })
}

fn load(dir: &Path) -> anyhow::Result<Dataset> {
    read_dataset(dir).with_context(|| format!("cannot load dataset {}", dir.display()))
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

pub fn generate(args: GenerateArgs, file: FileConfig, exec: Execution) -> anyhow::Result<()> {
    let problem = parse_problem(&pick(args.problem, file.problem, "sp5".into()))?;
    let mut cfg = GenConfig::new(
        problem,
        pick(args.n, file.n, 1000),
        pick(args.deg, file.deg, 4),
        pick(args.seed, file.seed, 0),
    );
    cfg.noise_half_width = pick(args.noise, file.noise, 0.5);
    let out = require(args.out, file.out, "out")?;
    cfg.validate()?;
    create_dir(&out)?;
    let ds = generate_with(&cfg, exec)?;
    write_dataset(&out, &ds).with_context(|| format!("cannot write dataset to {}", out.display()))?;
    println!(
        "wrote {} samples of {} (d = {}, p = {}, deg = {}, seed = {}) to {}",
        ds.len(),
        problem,
        ds.cost_dim(),
        ds.feature_dim(),
        cfg.deg,
        cfg.seed,
        out.display()
    );
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub problem: ProblemKind,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub config: TrainConfig,
    pub dataset: PathBuf,
}

impl ModelFile {
    fn predictor(&self) -> anyhow::Result<LinearPredictor> {
        Ok(LinearPredictor::from_parts(self.weights.clone(), self.bias.clone())?)
    }
}

pub fn train_cmd(args: TrainArgs, file: FileConfig, exec: Execution) -> anyhow::Result<()> {
    let data_dir = require(args.data, file.data, "data")?;
    let out = require(args.out, file.out, "out")?;
    let method = parse_method(&pick(args.method, file.method, "cave+".into()), "method")?;
    let seed = pick(args.seed, file.seed, 0);

    let data = load(&data_dir)?;
    let val = match args.val.or(file.val) {
        Some(dir) => Some(load(&dir)?),
        None => None,
    };
    let problem = data.config.problem;
    if let Some(v) = &val {
        if v.config.problem != problem {
            return Err(ConfigError(format!(
                "validation set is {} but training set is {problem}",
                v.config.problem
            ))
            .into());
        }
    }
    let mut cfg = TrainConfig::new(Method::from_id(method), problem, seed);
    cfg.learning_rate = pick(args.lr, file.lr, cfg.learning_rate);
    cfg.epochs = pick(args.epochs, file.epochs, cfg.epochs);
    cfg.batch_size = pick(args.batch_size, file.batch_size, cfg.batch_size);
    cfg.exec = exec;
    cfg.validate()?;
    create_dir(&out)?;

    let oracle = problem.build()?;
    let init = LinearPredictor::seeded(oracle.dim(), problem.feature_dim(), seed);
    let outcome = train(init, &data.samples, val.as_ref().map(|v| v.samples.as_slice()), &oracle, &cfg)?;
    write_log(&out.join("log.csv"), &outcome.log)?;

    let m = &outcome.model;
    let model = ModelFile {
        problem,
        weights: (0..m.cost_dim).map(|j| m.weight_row(j).to_vec()).collect(),
        bias: m.bias.clone(),
        config: cfg,
        dataset: data_dir,
    };
    fs::write(out.join("model.json"), serde_json::to_string_pretty(&model)? + "\n")?;
    let last = outcome.log.last().expect("at least one epoch");
    println!(
        "trained {method} on {} samples for {} epochs in {:.2}s: final loss {:.6}{}",
        data.len(),
        last.epoch,
        outcome.train_seconds,
        last.train_loss,
        if last.val_regret.is_nan() {
            String::new()
        } else {
            format!(", validation regret {:.2}%", 100.0 * last.val_regret)
        }
    );
    println!("wrote {} and {}", out.join("model.json").display(), out.join("log.csv").display());
    Ok(())
}

pub fn eval(args: EvalArgs, file: FileConfig, exec: Execution) -> anyhow::Result<()> {
    let model_path = require(args.model, file.model, "model")?;
    let data_dir = require(args.data, file.data, "data")?;
    let text = fs::read_to_string(&model_path)
        .with_context(|| format!("cannot read {}", model_path.display()))?;
    let model: ModelFile = serde_json::from_str(&text)
        .map_err(|e| ConfigError(format!("model file {}: {e}", model_path.display())))?;
    let data = load(&data_dir)?;
    if data.config.problem != model.problem {
        return Err(ConfigError(format!(
            "model was trained on {} but the dataset is {}",
            model.problem, data.config.problem
        ))
        .into());
    }
    let oracle = model.problem.build()?;
    let r = normalized_regret(&model.predictor()?, &data.samples, &oracle, exec)?;
    println!("normalized regret: {:.4}% over {} samples", 100.0 * r, data.len());
    Ok(())
}

/// Returns the number of failed (method, seed) cells.
pub fn benchmark(args: BenchmarkArgs, file: FileConfig, exec: Execution) -> anyhow::Result<usize> {
    let problem = parse_problem(&pick(args.problem, file.problem, "sp5".into()))?;
    let names = pick(
        args.methods,
        file.methods,
        MethodId::ALL.iter().map(|m| m.to_string()).collect(),
    );
    let methods = names.iter().map(|s| parse_method(s, "methods")).collect::<anyhow::Result<Vec<_>>>()?;
    let mut cfg = ExperimentConfig::new(problem, pick(args.deg, file.deg, 4), methods);
    cfg.seeds = pick(args.seeds, file.seeds, 5);
    cfg.root_seed = pick(args.seed, file.seed, 0);
    cfg.n_train = pick(args.n_train, file.n_train, 1000);
    cfg.n_val = pick(args.n_val, file.n_val, 1000);
    cfg.n_test = pick(args.n_test, file.n_test, 1000);
    cfg.noise_half_width = pick(args.noise, file.noise, 0.5);
    cfg.learning_rate = args.lr.or(file.lr);
    cfg.epochs = args.epochs.or(file.epochs);
    cfg.batch_size = pick(args.batch_size, file.batch_size, 32);
    cfg.exec = exec;
    let out = require(args.out, file.out, "out")?;
    cfg.validate()?;
    create_dir(&out)?;

    let report = run_experiment(&cfg)?;
    report.write(&out)?;
    print!("{}", report.to_markdown());
    println!("\nwrote {} and {}", out.join("report.csv").display(), out.join("report.md").display());
    Ok(report.failures())
}
