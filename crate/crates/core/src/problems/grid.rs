use crate::cone::{extract_generators, ConstraintSystem, LinearConstraint, SubconeGenerators, DEFAULT_BINDING_TOL};
use crate::error::{Error, Result};

use super::{check_costs, Oracle};

/// Shortest path on a `height × width` grid from the northwest corner to the
/// southeast corner, moving only right or down.
///
/// Nodes are numbered row-major. Edges are listed node by node: the rightward
/// edge of a node (if any) precedes its downward edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpProblem {
    height: usize,
    width: usize,
    edges: Vec<(usize, usize)>,
    incoming: Vec<Vec<usize>>,
}

impl GridSpProblem {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 || height * width < 2 {
            return Err(Error::config("problem", "grid needs at least two nodes"));
        }
        let mut edges = Vec::new();
        for r in 0..height {
            for c in 0..width {
                let v = r * width + c;
                if c + 1 < width {
                    edges.push((v, v + 1));
                }
                if r + 1 < height {
                    edges.push((v, v + width));
                }
            }
        }
        let mut incoming = vec![Vec::new(); height * width];
        for (e, &(_, to)) in edges.iter().enumerate() {
            incoming[to].push(e);
        }
        Ok(Self {
            height,
            width,
            edges,
            incoming,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> usize {
        self.height * self.width
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn source(&self) -> usize {
        0
    }

    pub fn target(&self) -> usize {
        self.nodes() - 1
    }

    /// Flow conservation: out − in = +1 at the source, −1 at the target, 0
    /// elsewhere. One equality per node.
    pub fn constraint_system(&self) -> ConstraintSystem {
        let mut sys = ConstraintSystem::new(self.edges.len());
        for v in 0..self.nodes() {
            let mut row = vec![0.0; self.edges.len()];
            for (e, &(from, to)) in self.edges.iter().enumerate() {
                if from == v {
                    row[e] += 1.0;
                }
                if to == v {
                    row[e] -= 1.0;
                }
            }
            let rhs = if v == self.source() {
                1.0
            } else if v == self.target() {
                -1.0
            } else {
                0.0
            };
            sys.push(LinearConstraint::eq(row, rhs));
        }
        sys
    }

    /// Minimum-cost path by dynamic programming in topological (row-major)
    /// order. Among equal-cost predecessors the smallest edge index wins.
    pub fn solve(&self, c: &[f64]) -> Result<Vec<f64>> {
        check_costs(c, self.edges.len())?;
        let n = self.nodes();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![usize::MAX; n];
        dist[0] = 0.0;
        for v in 1..n {
            for &e in &self.incoming[v] {
                let cand = dist[self.edges[e].0] + c[e];
                if cand < dist[v] {
                    dist[v] = cand;
                    pred[v] = e;
                }
            }
        }
        let mut w = vec![0.0; self.edges.len()];
        let mut v = self.target();
        while v != self.source() {
            let e = pred[v];
            w[e] = 1.0;
            v = self.edges[e].0;
        }
        Ok(w)
    }

    pub fn subcone(&self, w_star: &[f64]) -> Result<SubconeGenerators> {
        extract_generators(&self.constraint_system(), w_star, DEFAULT_BINDING_TOL)
    }
}

impl Oracle for GridSpProblem {
    fn dim(&self) -> usize {
        self.edges.len()
    }

    fn solve(&self, c: &[f64]) -> Result<Vec<f64>> {
        GridSpProblem::solve(self, c)
    }

    fn subcone(&self, w_star: &[f64]) -> Result<SubconeGenerators> {
        GridSpProblem::subcone(self, w_star)
    }
}
