//! Synthetic feature/cost datasets for shortest path and TSP.
//!
//! Every dataset draws its feature map `B` (and, for TSP, node coordinates)
//! once; samples then draw features `x ~ N(0, I)` and multiplicative noise
//! `ε ~ U[1 − h, 1 + h]` per cost coordinate.

use std::fs;
use std::path::Path;

use rand::distr::{Bernoulli, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cone::SubconeGenerators;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::dot;
use crate::problems::{Oracle, Problem, ProblemKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub problem: ProblemKind,
    pub n_samples: usize,
    pub deg: u32,
    /// Half-width `h` of the noise interval `[1 − h, 1 + h]`.
    #[serde(default = "default_noise")]
    pub noise_half_width: f64,
    pub seed: u64,
}

fn default_noise() -> f64 {
    0.5
}

impl GenConfig {
    pub fn new(problem: ProblemKind, n_samples: usize, deg: u32, seed: u64) -> Self {
        Self {
            problem,
            n_samples,
            deg,
            noise_half_width: default_noise(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1 {
            return Err(Error::config("n_samples", "must be at least 1"));
        }
        if self.deg < 1 {
            return Err(Error::config("deg", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.noise_half_width) {
            return Err(Error::config("noise_half_width", "must lie in [0, 1)"));
        }
        self.problem.build().map(|_| ())
    }
}

#[derive(Debug, Clone)]
pub struct DataSample {
    pub x: Vec<f64>,
    pub c: Vec<f64>,
    pub w_star: Vec<f64>,
    pub z_star: f64,
    pub gen: SubconeGenerators,
}

impl DataSample {
    /// Solves for `w*` and caches its subcone.
    pub fn from_costs<O: Oracle + ?Sized>(oracle: &O, x: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let w_star = oracle.solve(&c)?;
        Self::from_solution(oracle, x, c, w_star)
    }

    pub fn from_solution<O: Oracle + ?Sized>(
        oracle: &O,
        x: Vec<f64>,
        c: Vec<f64>,
        w_star: Vec<f64>,
    ) -> Result<Self> {
        let gen = oracle.subcone(&w_star)?;
        Ok(Self {
            z_star: dot(&c, &w_star),
            x,
            c,
            w_star,
            gen,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub config: GenConfig,
    /// Feature map, `d` rows of length `p`, entries in {0, 1}.
    pub b: Vec<Vec<f64>>,
    /// Node coordinates (TSP only).
    pub coords: Option<Vec<[f64; 2]>>,
    pub samples: Vec<DataSample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.config.problem.feature_dim()
    }

    pub fn cost_dim(&self) -> usize {
        self.b.len()
    }
}

/// Shortest-path cost of one coordinate: `[((b·x)/√p + 3)^deg / 3.5^deg + 1]·ε`.
pub fn sp_cost(bx: f64, p: usize, deg: u32, eps: f64) -> f64 {
    let base = bx / (p as f64).sqrt() + 3.0;
    (base.powi(deg as i32) / 3.5f64.powi(deg as i32) + 1.0) * eps
}

/// TSP cost of one edge: `dist + ((b·x)/√p + 3)^deg·ε / 3^(deg−1)`.
pub fn tsp_cost(dist: f64, bx: f64, p: usize, deg: u32, eps: f64) -> f64 {
    let base = bx / (p as f64).sqrt() + 3.0;
    dist + base.powi(deg as i32) * eps / 3f64.powi(deg as i32 - 1)
}

fn draw_b<R: Rng>(rng: &mut R, d: usize, p: usize) -> Vec<Vec<f64>> {
    let bern = Bernoulli::new(0.5).expect("valid probability");
    (0..d)
        .map(|_| (0..p).map(|_| if rng.sample(bern) { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn edge_distances(problem: &Problem, coords: &[[f64; 2]]) -> Vec<f64> {
    match problem {
        Problem::Tsp(t) => t
            .edges()
            .into_iter()
            .map(|(i, j)| {
                let (a, b) = (coords[i], coords[j]);
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            })
            .collect(),
        Problem::ShortestPath(_) => Vec::new(),
    }
}

/// Generates a dataset for `config.problem`, computing `w*` and subcones with
/// the given execution policy. Random draws are sequential, so the result does
/// not depend on `exec`.
pub fn generate_with(config: &GenConfig, exec: Execution) -> Result<Dataset> {
    config.validate()?;
    let problem = config.problem.build()?;
    let d = problem.dim();
    let p = config.problem.feature_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Uniform::new_inclusive(1.0 - config.noise_half_width, 1.0 + config.noise_half_width)
        .map_err(|e| Error::config("noise_half_width", e.to_string()))?;

    let coords = match &problem {
        Problem::Tsp(t) => Some(
            (0..t.nodes())
                .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
                .collect::<Vec<_>>(),
        ),
        Problem::ShortestPath(_) => None,
    };
    let dist = coords
        .as_deref()
        .map(|c| edge_distances(&problem, c))
        .unwrap_or_default();
    let b = draw_b(&mut rng, d, p);

    let mut raw = Vec::with_capacity(config.n_samples);
    for _ in 0..config.n_samples {
        let x: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let c: Vec<f64> = b
            .iter()
            .enumerate()
            .map(|(e, row)| {
                let eps = rng.sample(noise);
                let bx = dot(row, &x);
                match problem {
                    Problem::ShortestPath(_) => sp_cost(bx, p, config.deg, eps),
                    Problem::Tsp(_) => tsp_cost(dist[e], bx, p, config.deg, eps),
                }
            })
            .collect();
        raw.push((x, c));
    }

    let samples = exec
        .map_indexed(raw.len(), |i| {
            let (x, c) = &raw[i];
            DataSample::from_costs(&problem, x.clone(), c.clone())
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        config: config.clone(),
        b,
        coords,
        samples,
    })
}

pub fn generate(config: &GenConfig) -> Result<Dataset> {
    generate_with(config, Execution::default())
}

/// Shortest-path dataset; `config.problem` must be a grid.
pub fn gen_sp(config: &GenConfig) -> Result<Dataset> {
    match config.problem {
        ProblemKind::ShortestPath { .. } => generate(config),
        _ => Err(Error::config("problem", "gen_sp needs a shortest-path problem")),
    }
}

/// TSP dataset; `config.problem` must be a TSP.
pub fn gen_tsp(config: &GenConfig) -> Result<Dataset> {
    match config.problem {
        ProblemKind::Tsp { .. } => generate(config),
        _ => Err(Error::config("problem", "gen_tsp needs a TSP problem")),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    config: GenConfig,
    seed: u64,
    n_samples: usize,
    feature_dim: usize,
    cost_dim: usize,
    b: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<[f64; 2]>>,
}

/// Writes `meta.json` and `samples.csv` into `dir`, creating it if needed.
pub fn write_dataset(dir: &Path, ds: &Dataset) -> Result<()> {
    fs::create_dir_all(dir)?;
    let meta = Meta {
        config: ds.config.clone(),
        seed: ds.config.seed,
        n_samples: ds.len(),
        feature_dim: ds.feature_dim(),
        cost_dim: ds.cost_dim(),
        b: ds.b.clone(),
        coords: ds.coords.clone(),
    };
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)? + "\n")?;

    let (p, d) = (ds.feature_dim(), ds.cost_dim());
    let mut w = csv::Writer::from_path(dir.join("samples.csv"))?;
    let header = (0..p)
        .map(|i| format!("x{i}"))
        .chain((0..d).map(|i| format!("c{i}")))
        .chain((0..d).map(|i| format!("w{i}")));
    w.write_record(header)?;
    for s in &ds.samples {
        let fields = s.x.iter().chain(&s.c).chain(&s.w_star).map(|v| format!("{v}"));
        w.write_record(fields)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dataset written by [`write_dataset`], recomputing `z*` and the
/// subcones from the stored solutions.
pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    let meta: Meta = serde_json::from_str(&fs::read_to_string(dir.join("meta.json"))?)?;
    meta.config.validate()?;
    let problem = meta.config.problem.build()?;
    let (p, d) = (meta.config.problem.feature_dim(), problem.dim());
    if meta.feature_dim != p || meta.cost_dim != d {
        return Err(Error::InvalidInput(format!(
            "meta.json dimensions ({}, {}) do not match problem {} ({p}, {d})",
            meta.feature_dim, meta.cost_dim, meta.config.problem
        )));
    }
    let mut rdr = csv::Reader::from_path(dir.join("samples.csv"))?;
    let width = rdr.headers()?.len();
    if width != p + 2 * d {
        return Err(Error::DimensionMismatch {
            context: "samples.csv columns",
            expected: p + 2 * d,
            got: width,
        });
    }
    let mut samples = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let vals = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidInput(format!("samples.csv row {}: {e}", i + 1)))?;
        let x = vals[..p].to_vec();
        let c = vals[p..p + d].to_vec();
        let w = vals[p + d..].to_vec();
        samples.push(DataSample::from_solution(&problem, x, c, w)?);
    }
    if samples.len() != meta.n_samples {
        return Err(Error::InvalidInput(format!(
            "samples.csv has {} rows, meta.json declares {}",
            samples.len(),
            meta.n_samples
        )));
    }
    Ok(Dataset {
        config: meta.config,
        b: meta.b,
        coords: meta.coords,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sp_cost_at_degenerate_point() {
        // deg 1, Bx = 0, ε = 1: 3/3.5 + 1
        let v = sp_cost(0.0, 5, 1, 1.0);
        assert!((v - (3.0 / 3.5 + 1.0)).abs() < 1e-15);
        assert!((v - 1.857142857142857).abs() < 1e-12);
    }

    #[test]
    fn tsp_cost_at_degenerate_point() {
        assert!((tsp_cost(0.25, 0.0, 10, 1, 1.0) - 3.25).abs() < 1e-15);
        // deg 6: 3⁶/3⁵ = 3
        assert!((tsp_cost(0.25, 0.0, 10, 6, 1.0) - 3.25).abs() < 1e-12);
    }

    #[test]
    fn sp_dataset_shape_and_positivity() {
        let cfg = GenConfig::new("sp5".parse().unwrap(), 20, 4, 3);
        let ds = gen_sp(&cfg).unwrap();
        assert_eq!(ds.len(), 20);
        assert_eq!(ds.b.len(), 40);
        assert!(ds.b.iter().all(|r| r.len() == 5));
        for s in &ds.samples {
            assert!(s.c.iter().all(|&v| v > 0.0));
            assert!((s.z_star - dot(&s.c, &s.w_star)).abs() < 1e-12);
            assert_eq!(s.w_star.iter().sum::<f64>(), 8.0);
        }
    }

    #[test]
    fn tsp_costs_dominate_distances() {
        let cfg = GenConfig::new("tsp6".parse().unwrap(), 5, 4, 11);
        let ds = gen_tsp(&cfg).unwrap();
        let problem = cfg.problem.build().unwrap();
        let dist = edge_distances(&problem, ds.coords.as_ref().unwrap());
        for s in &ds.samples {
            for (c, d) in s.c.iter().zip(&dist) {
                assert!(c >= d && *d > 0.0);
            }
        }
    }

    #[test]
    fn validation_names_field() {
        let mut cfg = GenConfig::new("sp5".parse().unwrap(), 10, 0, 1);
        match cfg.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "deg"),
            other => panic!("unexpected {other:?}"),
        }
        cfg.deg = 2;
        cfg.n_samples = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn wrong_family_is_rejected() {
        let cfg = GenConfig::new("tsp5".parse().unwrap(), 1, 1, 1);
        assert!(gen_sp(&cfg).is_err());
    }
}
