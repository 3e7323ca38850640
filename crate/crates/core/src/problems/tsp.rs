use crate::cone::{extract_generators, ConstraintSystem, LinearConstraint, SubconeGenerators, DEFAULT_BINDING_TOL};
use crate::error::{Error, Result};

use super::{check_costs, Oracle};

/// Largest instance the Held–Karp oracle accepts.
pub const MAX_TSP_NODES: usize = 15;

/// Symmetric TSP on `n` nodes over the undirected edges `(i, j)`, `i < j`, in
/// lexicographic order.
///
/// The formulation is degree-2 equalities plus subtour elimination
/// `Σ_{e ⊆ S} x_e ≤ |S| − 1` for every `S` with `2 ≤ |S| ≤ n − 1`. The subtour
/// family is never materialized: only the constraints binding at a tour are
/// generated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TspProblem {
    n: usize,
}

impl TspProblem {
    pub fn new(n: usize) -> Result<Self> {
        if !(4..=MAX_TSP_NODES).contains(&n) {
            return Err(Error::config(
                "problem",
                format!("TSP node count must lie in 4..={MAX_TSP_NODES}, got {n}"),
            ));
        }
        Ok(Self { n })
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    /// Index of the undirected edge `{i, j}`.
    pub fn edge_index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        debug_assert!(i != j && j < self.n);
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..self.n {
            for j in i + 1..self.n {
                out.push((i, j));
            }
        }
        out
    }

    /// Incidence vector of a node sequence visited cyclically.
    pub fn tour_to_solution(&self, order: &[usize]) -> Vec<f64> {
        let mut w = vec![0.0; self.dim()];
        for k in 0..order.len() {
            w[self.edge_index(order[k], order[(k + 1) % order.len()])] = 1.0;
        }
        w
    }

    /// Recovers the visiting order (starting at node 0, second node the
    /// smaller neighbour of 0) from an incidence vector.
    pub fn solution_to_tour(&self, w: &[f64]) -> Result<Vec<usize>> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "tour incidence vector",
                expected: self.dim(),
                got: w.len(),
            });
        }
        let mut adj = vec![Vec::with_capacity(2); self.n];
        for (e, (i, j)) in self.edges().into_iter().enumerate() {
            let v = w[e];
            if (v - 1.0).abs() <= DEFAULT_BINDING_TOL {
                adj[i].push(j);
                adj[j].push(i);
            } else if v.abs() > DEFAULT_BINDING_TOL {
                return Err(Error::NotBinary { index: e, value: v });
            }
        }
        if let Some(v) = adj.iter().position(|a| a.len() != 2) {
            return Err(Error::Infeasible(format!(
                "degree constraint of node {v} violated ({} incident edges)",
                adj[v].len()
            )));
        }
        let mut order = vec![0];
        let mut prev = 0;
        let mut cur = adj[0][0].min(adj[0][1]);
        while cur != 0 {
            order.push(cur);
            let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
            prev = cur;
            cur = next;
            if order.len() > self.n {
                break;
            }
        }
        if order.len() != self.n {
            return Err(Error::Infeasible(format!(
                "subtour constraint violated: cycle through node 0 has {} of {} nodes",
                order.len(),
                self.n
            )));
        }
        Ok(order)
    }

    /// Exact optimal tour by Held–Karp.
    ///
    /// Among optimal tours the lexicographically smallest node sequence
    /// starting at node 0 is returned.
    pub fn solve(&self, c: &[f64]) -> Result<Vec<f64>> {
        check_costs(c, self.dim())?;
        let order = self.solve_order(c);
        Ok(self.tour_to_solution(&order))
    }

    fn solve_order(&self, c: &[f64]) -> Vec<usize> {
        let n = self.n;
        let k = n - 1; // nodes 1..n map to bits 0..k
        let full = (1usize << k) - 1;
        let cost = |a: usize, b: usize| c[self.edge_index(a, b)];

        // go[u * k + j]: cheapest path from node j+1 through all nodes of u
        // (j ∉ u) and back to node 0.
        let mut go = vec![f64::INFINITY; (1usize << k) * k];
        for j in 0..k {
            go[j] = cost(j + 1, 0);
        }
        for u in 1..=full {
            for j in 0..k {
                if u & (1 << j) != 0 {
                    continue;
                }
                let mut best = f64::INFINITY;
                let mut rest = u;
                while rest != 0 {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    let cand = cost(j + 1, b + 1) + go[(u & !(1 << b)) * k + b];
                    if cand < best {
                        best = cand;
                    }
                }
                go[u * k + j] = best;
            }
        }

        let scale: f64 = c.iter().map(|v| v.abs()).sum::<f64>() + 1.0;
        let slack = 1e-12 * scale;
        let mut target = (0..k)
            .map(|b| cost(0, b + 1) + go[(full & !(1 << b)) * k + b])
            .fold(f64::INFINITY, f64::min);

        let mut order = Vec::with_capacity(n);
        order.push(0);
        let mut cur = 0;
        let mut u = full;
        while u != 0 {
            let mut rest = u;
            let mut chosen = None;
            while rest != 0 {
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let tail = go[(u & !(1 << b)) * k + b];
                if cost(cur, b + 1) + tail <= target + slack {
                    chosen = Some((b, tail));
                    break;
                }
            }
            let (b, tail) = chosen.expect("Held-Karp reconstruction lost the optimum");
            order.push(b + 1);
            cur = b + 1;
            u &= !(1 << b);
            target = tail;
        }
        order
    }

    /// Node sets of the subtour constraints that are tight at `order`: exactly
    /// the contiguous arcs of the cycle with `2 ≤ |S| ≤ n − 1`. Each set is
    /// returned sorted.
    pub fn binding_subtour_sets(&self, order: &[usize]) -> Vec<Vec<usize>> {
        let n = self.n;
        let mut sets = Vec::with_capacity(n * (n - 2));
        for start in 0..n {
            for len in 2..n {
                let mut s: Vec<usize> = (0..len).map(|t| order[(start + t) % n]).collect();
                s.sort_unstable();
                sets.push(s);
            }
        }
        sets
    }

    /// Coefficient row of the subtour constraint for node set `s`.
    pub fn subtour_row(&self, s: &[usize]) -> Vec<f64> {
        let mut row = vec![0.0; self.dim()];
        for (a, &i) in s.iter().enumerate() {
            for &j in &s[a + 1..] {
                row[self.edge_index(i, j)] = 1.0;
            }
        }
        row
    }

    /// Degree equalities followed by the binding subtour constraints of the
    /// tour.
    pub fn binding_system(&self, order: &[usize]) -> ConstraintSystem {
        let mut sys = ConstraintSystem::new(self.dim());
        for v in 0..self.n {
            let mut row = vec![0.0; self.dim()];
            for u in 0..self.n {
                if u != v {
                    row[self.edge_index(u, v)] = 1.0;
                }
            }
            sys.push(LinearConstraint::eq(row, 2.0));
        }
        for s in self.binding_subtour_sets(order) {
            let rhs = s.len() as f64 - 1.0;
            sys.push(LinearConstraint::le(self.subtour_row(&s), rhs));
        }
        sys
    }

    pub fn subcone(&self, w_star: &[f64]) -> Result<SubconeGenerators> {
        let order = self.solution_to_tour(w_star)?;
        extract_generators(&self.binding_system(&order), w_star, DEFAULT_BINDING_TOL)
    }
}

impl Oracle for TspProblem {
    fn dim(&self) -> usize {
        TspProblem::dim(self)
    }

    fn solve(&self, c: &[f64]) -> Result<Vec<f64>> {
        TspProblem::solve(self, c)
    }

    fn subcone(&self, w_star: &[f64]) -> Result<SubconeGenerators> {
        TspProblem::subcone(self, w_star)
    }
}
