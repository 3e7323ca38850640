//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use conealign::cone::{Provenance, SubconeGenerators};
use conealign::problems::{GridSpProblem, TspProblem};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Lawson–Hanson active-set NNLS: `min ‖Gᵀλ − c‖, λ ≥ 0`. Returns `(λ, Gᵀλ)`.
pub fn lawson_hanson(g: &DMatrix<f64>, c: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let a = g.transpose(); // d × m
    let b = DVector::from_column_slice(c);
    let m = a.ncols();
    let tol = 1e-12 * (1.0 + b.norm()) * (1.0 + a.norm());
    let mut x = DVector::zeros(m);
    let mut passive = vec![false; m];

    let solve_on = |passive: &[bool]| -> DVector<f64> {
        let idx: Vec<usize> = (0..m).filter(|&j| passive[j]).collect();
        let sub = a.select_columns(&idx);
        let z = sub.svd(true, true).solve(&b, 1e-13).expect("svd solve");
        let mut full = DVector::zeros(m);
        for (k, &j) in idx.iter().enumerate() {
            full[j] = z[k];
        }
        full
    };

    for _outer in 0..(10 * m + 10) {
        let w = a.transpose() * (&b - &a * &x);
        let cand = (0..m)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].partial_cmp(&w[j]).unwrap());
        match cand {
            Some(t) if w[t] > tol => passive[t] = true,
            _ => break,
        }
        loop {
            let z = solve_on(&passive);
            if (0..m).filter(|&j| passive[j]).all(|j| z[j] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for j in 0..m {
                if passive[j] && z[j] <= 0.0 {
                    alpha = alpha.min(x[j] / (x[j] - z[j]));
                }
            }
            x += alpha * (&z - &x);
            for j in 0..m {
                if passive[j] && x[j] <= 1e-14 {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
        }
    }
    let p = &a * &x;
    (x.iter().copied().collect(), p.iter().copied().collect())
}

/// Exhaustive NNLS over all supports (tiny `m` only).
pub fn enumerate_nnls(g: &DMatrix<f64>, c: &[f64]) -> Vec<f64> {
    let m = g.nrows();
    let a = g.transpose();
    let b = DVector::from_column_slice(c);
    let mut best = (b.norm(), DVector::zeros(a.nrows()));
    for mask in 1usize..(1 << m) {
        let idx: Vec<usize> = (0..m).filter(|j| mask & (1 << j) != 0).collect();
        let sub = a.select_columns(&idx);
        let z = sub.clone().svd(true, true).solve(&b, 1e-13).unwrap();
        if z.iter().all(|&v| v >= -1e-12) {
            let p = &sub * z;
            let r = (&p - &b).norm();
            if r < best.0 {
                best = (r, p);
            }
        }
    }
    best.1.iter().copied().collect()
}

pub fn random_generators<R: Rng>(rng: &mut R, m: usize, d: usize) -> SubconeGenerators {
    let data: Vec<f64> = (0..m * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let prov = (0..m).map(Provenance::Inequality).collect();
    SubconeGenerators::new(DMatrix::from_row_slice(m, d, &data), prov).unwrap()
}

pub fn random_vec<R: Rng>(rng: &mut R, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| scale * rng.random_range(-1.0..1.0)).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// All monotone source→target paths of a grid, as incidence vectors.
pub fn enumerate_grid_paths(p: &GridSpProblem) -> Vec<Vec<f64>> {
    let (h, w) = (p.height(), p.width());
    let index_of = |from: usize, to: usize| {
        p.edges()
            .iter()
            .position(|&e| e == (from, to))
            .expect("edge exists")
    };
    let mut out = Vec::new();
    let moves = (h - 1) + (w - 1);
    for mask in 0usize..(1 << moves) {
        if mask.count_ones() as usize != h - 1 {
            continue;
        }
        let mut x = vec![0.0; p.dim()];
        let mut v = 0;
        for k in 0..moves {
            let next = if mask & (1 << k) != 0 { v + w } else { v + 1 };
            x[index_of(v, next)] = 1.0;
            v = next;
        }
        out.push(x);
    }
    out
}

/// All Hamiltonian cycles through node 0, one per undirected tour.
pub fn enumerate_tours(p: &TspProblem) -> Vec<Vec<usize>> {
    fn permute(rest: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == rest.len() {
            if rest[0] < rest[rest.len() - 1] {
                let mut t = vec![0];
                t.extend_from_slice(rest);
                out.push(t);
            }
            return;
        }
        for i in k..rest.len() {
            rest.swap(k, i);
            permute(rest, k + 1, out);
            rest.swap(k, i);
        }
    }
    let mut rest: Vec<usize> = (1..p.nodes()).collect();
    let mut out = Vec::new();
    permute(&mut rest, 0, &mut out);
    out
}

pub fn tour_cost(p: &TspProblem, c: &[f64], order: &[usize]) -> f64 {
    (0..order.len())
        .map(|k| c[p.edge_index(order[k], order[(k + 1) % order.len()])])
        .sum()
}

/// Subtour sets `S` (sorted, `2 ≤ |S| ≤ n − 1`) whose constraint is tight at
/// the tour, found by checking every subset.
pub fn brute_force_tight_sets(p: &TspProblem, order: &[usize]) -> Vec<Vec<usize>> {
    let n = p.nodes();
    let w = p.tour_to_solution(order);
    let mut out = Vec::new();
    for mask in 0usize..(1 << n) {
        let size = mask.count_ones() as usize;
        if size < 2 || size > n - 1 {
            continue;
        }
        let s: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let lhs = dot(&p.subtour_row(&s), &w);
        if (lhs - (size as f64 - 1.0)).abs() < 1e-9 {
            out.push(s);
        }
    }
    out
}

/// Central finite-difference gradient.
pub fn finite_diff<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let orig = xp[i];
        xp[i] = orig + h;
        let fp = f(&xp);
        xp[i] = orig - h;
        let fm = f(&xp);
        xp[i] = orig;
        out.push((fp - fm) / (2.0 * h));
    }
    out
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    diff / norm(b).max(norm(a)).max(1e-12)
}
