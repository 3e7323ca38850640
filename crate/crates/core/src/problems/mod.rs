//! Exact oracles for the benchmark problem families.

mod grid;
mod tsp;

pub use grid::GridSpProblem;
pub use tsp::{TspProblem, MAX_TSP_NODES};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cone::SubconeGenerators;
use crate::error::{Error, Result};

/// A binary linear program family `min c·w` over a fixed feasible set.
pub trait Oracle: Send + Sync {
    /// Number of decision variables.
    fn dim(&self) -> usize;

    /// Returns an optimal 0/1 solution for cost `c`.
    fn solve(&self, c: &[f64]) -> Result<Vec<f64>>;

    /// Generators of the optimal subcone at a feasible solution.
    fn subcone(&self, w_star: &[f64]) -> Result<SubconeGenerators>;
}

/// Problem family selector, e.g. `sp5`, `sp3x4`, `tsp10`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ProblemKind {
    ShortestPath { height: usize, width: usize },
    Tsp { nodes: usize },
}

impl ProblemKind {
    pub fn build(&self) -> Result<Problem> {
        Ok(match *self {
            ProblemKind::ShortestPath { height, width } => {
                Problem::ShortestPath(GridSpProblem::new(height, width)?)
            }
            ProblemKind::Tsp { nodes } => Problem::Tsp(TspProblem::new(nodes)?),
        })
    }

    /// Feature dimension used by the synthetic generators.
    pub fn feature_dim(&self) -> usize {
        match self {
            ProblemKind::ShortestPath { .. } => 5,
            ProblemKind::Tsp { .. } => 10,
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ProblemKind::ShortestPath { height, width } if height == width => {
                write!(f, "sp{height}")
            }
            ProblemKind::ShortestPath { height, width } => write!(f, "sp{height}x{width}"),
            ProblemKind::Tsp { nodes } => write!(f, "tsp{nodes}"),
        }
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("problem", format!("unknown problem `{s}` (expected spN, spHxW or tspN)"));
        let s = s.trim().to_ascii_lowercase();
        if let Some(rest) = s.strip_prefix("tsp") {
            let nodes = rest.parse().map_err(|_| bad())?;
            return Ok(ProblemKind::Tsp { nodes });
        }
        if let Some(rest) = s.strip_prefix("sp") {
            let (h, w) = match rest.split_once('x') {
                Some((h, w)) => (h.parse().map_err(|_| bad())?, w.parse().map_err(|_| bad())?),
                None => {
                    let n = rest.parse().map_err(|_| bad())?;
                    (n, n)
                }
            };
            return Ok(ProblemKind::ShortestPath {
                height: h,
                width: w,
            });
        }
        Err(bad())
    }
}

impl From<ProblemKind> for String {
    fn from(k: ProblemKind) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for ProblemKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Concrete oracle for any supported family.
#[derive(Debug, Clone)]
pub enum Problem {
    ShortestPath(GridSpProblem),
    Tsp(TspProblem),
}

impl Problem {
    pub fn kind(&self) -> ProblemKind {
        match self {
            Problem::ShortestPath(p) => ProblemKind::ShortestPath {
                height: p.height(),
                width: p.width(),
            },
            Problem::Tsp(p) => ProblemKind::Tsp { nodes: p.nodes() },
        }
    }
}

impl Oracle for Problem {
    fn dim(&self) -> usize {
        match self {
            Problem::ShortestPath(p) => p.dim(),
            Problem::Tsp(p) => p.dim(),
        }
    }

    fn solve(&self, c: &[f64]) -> Result<Vec<f64>> {
        match self {
            Problem::ShortestPath(p) => p.solve(c),
            Problem::Tsp(p) => p.solve(c),
        }
    }

    fn subcone(&self, w_star: &[f64]) -> Result<SubconeGenerators> {
        match self {
            Problem::ShortestPath(p) => p.subcone(w_star),
            Problem::Tsp(p) => p.subcone(w_star),
        }
    }
}

pub(crate) fn check_costs(c: &[f64], dim: usize) -> Result<()> {
    if c.len() != dim {
        return Err(Error::DimensionMismatch {
            context: "oracle cost vector",
            expected: dim,
            got: c.len(),
        });
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("oracle cost vector is not finite".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["sp5", "sp3x4", "tsp10"] {
            let k: ProblemKind = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert!("cvrp20".parse::<ProblemKind>().is_err());
        assert!("spx".parse::<ProblemKind>().is_err());
    }

    #[test]
    fn sp5_has_forty_edges() {
        let p = "sp5".parse::<ProblemKind>().unwrap().build().unwrap();
        assert_eq!(p.dim(), 40);
    }
}
