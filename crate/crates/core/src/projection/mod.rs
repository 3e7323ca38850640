//! Projections of a predicted cost vector onto (or toward) a subcone.

mod ipm;

pub use ipm::{nnls_ipm, nnls_ipm_traced, IterStats};

use serde::{Deserialize, Serialize};

use crate::cone::SubconeGenerators;
use crate::error::{Error, Result};

/// Interior-point solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpSettings {
    pub max_iters: usize,
    pub kkt_tol: f64,
    pub fraction_to_boundary: f64,
    pub min_regularization: f64,
}

impl QpSettings {
    pub fn exact() -> Self {
        Self {
            max_iters: 100,
            kkt_tol: 1e-8,
            fraction_to_boundary: 0.99,
            min_regularization: 1e-10,
        }
    }

    /// Settings for the iteration-capped inner projection.
    pub fn inner(max_iters: usize) -> Self {
        Self {
            max_iters,
            ..Self::exact()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::config("max_iters", "must be at least 1"));
        }
        if !(self.kkt_tol > 0.0 && self.kkt_tol < 1.0) {
            return Err(Error::config("kkt_tol", "must lie in (0, 1)"));
        }
        if !(self.fraction_to_boundary > 0.0 && self.fraction_to_boundary < 1.0) {
            return Err(Error::config("fraction_to_boundary", "must lie in (0, 1)"));
        }
        if !(self.min_regularization >= 0.0) {
            return Err(Error::config("min_regularization", "must be nonnegative"));
        }
        Ok(())
    }
}

impl Default for QpSettings {
    fn default() -> Self {
        Self::exact()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub p: Vec<f64>,
    /// Combination weights; empty for the heuristic projection.
    pub lambda: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
}

/// Projects `c_hat` onto the cone, solving the NNLS problem to tolerance.
pub fn project_exact(
    gen: &SubconeGenerators,
    c_hat: &[f64],
    settings: &QpSettings,
) -> Result<ProjectionResult> {
    let res = nnls_ipm(gen.rows(), c_hat, settings)?;
    if !res.converged {
        log::debug!(
            "exact projection stopped after {} iterations (kkt {:.3e})",
            res.iterations,
            res.kkt_residual
        );
    }
    Ok(res)
}

/// Runs a capped number of interior-point iterations. The returned weights are
/// strictly positive, so `p` lies in the interior of the cone.
pub fn project_inner(
    gen: &SubconeGenerators,
    c_hat: &[f64],
    settings: &QpSettings,
) -> Result<ProjectionResult> {
    nnls_ipm(gen.rows(), c_hat, settings)
}

/// `p = (1 − γ)ĉ + γ·mean(G)`. No solver call, no membership guarantee.
pub fn project_heuristic(
    gen: &SubconeGenerators,
    c_hat: &[f64],
    gamma: f64,
) -> Result<ProjectionResult> {
    if c_hat.len() != gen.dim() {
        return Err(Error::DimensionMismatch {
            context: "heuristic projection",
            expected: gen.dim(),
            got: c_hat.len(),
        });
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::config("gamma", "must lie in [0, 1]"));
    }
    let mean = gen.row_mean();
    let p = c_hat
        .iter()
        .zip(&mean)
        .map(|(c, a)| (1.0 - gamma) * c + gamma * a)
        .collect();
    Ok(ProjectionResult {
        p,
        lambda: Vec::new(),
        iterations: 0,
        converged: false,
        kkt_residual: f64::NAN,
    })
}
