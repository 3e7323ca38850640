//! Training losses and their gradients with respect to the predicted cost.
//!
//! The cone-aligned loss is the negative cosine similarity between `ĉ` and a
//! projection `p` of `ĉ` onto (or toward) the subcone of the true solution.
//! `p` is held constant when differentiating.

use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cone::SubconeGenerators;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::problems::Oracle;
use crate::projection::{project_exact, project_heuristic, project_inner, QpSettings};

/// Below this norm a projection is treated as the cone apex. Interior-point
/// projections use the larger of this and their own absolute tolerance.
pub const APEX_EPS: f64 = 1e-12;

/// Counts of expensive solver calls.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverCalls {
    /// Projections solved to tolerance.
    pub qp_full: u64,
    /// Iteration-capped projections.
    pub qp_partial: u64,
    /// Exact combinatorial oracle calls.
    pub blp: u64,
}

impl AddAssign for SolverCalls {
    fn add_assign(&mut self, rhs: Self) {
        self.qp_full += rhs.qp_full;
        self.qp_partial += rhs.qp_partial;
        self.blp += rhs.blp;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput {
    pub value: f64,
    pub grad_c_hat: Vec<f64>,
    pub solver_calls: SolverCalls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaveKind {
    /// Exact projection.
    Exact,
    /// Iteration-capped inner projection.
    Plus,
    /// Inner projection with probability β, heuristic otherwise.
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaveVariant {
    pub kind: CaveKind,
    pub gamma: f64,
    pub beta: f64,
    pub inner_iters: usize,
}

impl CaveVariant {
    pub fn new(kind: CaveKind) -> Self {
        Self {
            kind,
            gamma: 0.2,
            beta: 0.3,
            inner_iters: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::config("gamma", "must lie in [0, 1]"));
        }
        if !(0.0..0.5).contains(&self.beta) {
            return Err(Error::config("beta", "must lie in [0, 0.5)"));
        }
        if self.inner_iters < 1 {
            return Err(Error::config("inner_iters", "must be at least 1"));
        }
        Ok(())
    }
}

/// Cosine loss against a fixed projection: `(value, ∂value/∂ĉ)`.
///
/// Returns `(0, 0)` when `p` is at the apex.
pub fn cosine_loss_detached(c_hat: &[f64], p: &[f64]) -> (f64, Vec<f64>) {
    let nc = norm(c_hat);
    let np = norm(p);
    if np <= APEX_EPS {
        return (0.0, vec![0.0; c_hat.len()]);
    }
    let cp = dot(c_hat, p);
    let value = -cp / (nc * np);
    let a = 1.0 / (nc * np);
    let b = cp / (nc * nc * nc * np);
    let grad = c_hat
        .iter()
        .zip(p)
        .map(|(&c, &pk)| -(a * pk - b * c))
        .collect();
    (value, grad)
}

fn check_c_hat(c_hat: &[f64], dim: usize) -> Result<()> {
    if c_hat.len() != dim {
        return Err(Error::DimensionMismatch {
            context: "predicted cost",
            expected: dim,
            got: c_hat.len(),
        });
    }
    if c_hat.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("predicted cost is not finite".into()));
    }
    Ok(())
}

/// Cone-aligned cosine loss for one sample.
pub fn cave_loss<R: Rng + ?Sized>(
    c_hat: &[f64],
    gen: &SubconeGenerators,
    variant: &CaveVariant,
    rng: &mut R,
) -> Result<LossOutput> {
    check_c_hat(c_hat, gen.dim())?;
    if norm(c_hat) == 0.0 {
        return Err(Error::InvalidInput("predicted cost vector is zero".into()));
    }
    let mut calls = SolverCalls::default();
    let exact = QpSettings::exact();
    let inner = QpSettings::inner(variant.inner_iters);
    // Interior-point projections cannot resolve p below their tolerance.
    let ipm_apex = APEX_EPS.max(exact.kkt_tol * (1.0 + norm(c_hat)));
    let (proj, apex_tol) = match variant.kind {
        CaveKind::Exact => {
            calls.qp_full += 1;
            (project_exact(gen, c_hat, &exact)?, ipm_apex)
        }
        CaveKind::Plus => {
            calls.qp_partial += 1;
            (project_inner(gen, c_hat, &inner)?, ipm_apex)
        }
        CaveKind::Hybrid => {
            let u: f64 = rng.random();
            if u < variant.beta {
                calls.qp_partial += 1;
                (project_inner(gen, c_hat, &inner)?, ipm_apex)
            } else {
                (project_heuristic(gen, c_hat, variant.gamma)?, APEX_EPS)
            }
        }
    };
    if norm(&proj.p) <= apex_tol {
        log::warn!("projection collapsed to the cone apex; sample contributes no gradient");
        return Ok(LossOutput {
            value: 0.0,
            grad_c_hat: vec![0.0; c_hat.len()],
            solver_calls: calls,
        });
    }
    let (value, grad) = cosine_loss_detached(c_hat, &proj.p);
    Ok(LossOutput {
        value,
        grad_c_hat: grad,
        solver_calls: calls,
    })
}

/// Mean squared error `‖ĉ − c‖²/d`.
pub fn mse_loss(c_hat: &[f64], c_true: &[f64]) -> Result<LossOutput> {
    check_c_hat(c_hat, c_true.len())?;
    let d = c_true.len() as f64;
    let diff: Vec<f64> = c_hat.iter().zip(c_true).map(|(a, b)| a - b).collect();
    Ok(LossOutput {
        value: dot(&diff, &diff) / d,
        grad_c_hat: diff.iter().map(|v| 2.0 * v / d).collect(),
        solver_calls: SolverCalls::default(),
    })
}

/// SPO+ subgradient `2(w*(c) − w*(2ĉ − c))`.
pub fn spo_plus_grad<O: Oracle + ?Sized>(
    c_hat: &[f64],
    c_true: &[f64],
    w_star: &[f64],
    oracle: &O,
) -> Result<LossOutput> {
    check_c_hat(c_hat, oracle.dim())?;
    let shifted: Vec<f64> = c_hat.iter().zip(c_true).map(|(a, c)| 2.0 * a - c).collect();
    let w_tilde = oracle.solve(&shifted)?;
    let diff: Vec<f64> = w_star.iter().zip(&w_tilde).map(|(a, b)| a - b).collect();
    Ok(LossOutput {
        value: dot(&shifted, &diff),
        grad_c_hat: diff.iter().map(|v| 2.0 * v).collect(),
        solver_calls: SolverCalls {
            blp: 1,
            ..Default::default()
        },
    })
}

/// Perturbed Fenchel–Young gradient `w*(c) − (1/K) Σ_k w*(ĉ + σZ_k)`.
pub fn pfyl_grad<O: Oracle + ?Sized, R: Rng + ?Sized>(
    c_hat: &[f64],
    w_star: &[f64],
    oracle: &O,
    sigma: f64,
    samples: usize,
    rng: &mut R,
) -> Result<LossOutput> {
    check_c_hat(c_hat, oracle.dim())?;
    if samples < 1 {
        return Err(Error::config("pfyl_samples", "must be at least 1"));
    }
    if !(sigma > 0.0) {
        return Err(Error::config("pfyl_sigma", "must be positive"));
    }
    let d = c_hat.len();
    let mut mean_w = vec![0.0; d];
    let mut mean_obj = 0.0;
    for _ in 0..samples {
        let perturbed: Vec<f64> = c_hat
            .iter()
            .map(|&c| c + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let w = oracle.solve(&perturbed)?;
        mean_obj += dot(&perturbed, &w);
        for (m, x) in mean_w.iter_mut().zip(&w) {
            *m += x;
        }
    }
    let k = samples as f64;
    mean_w.iter_mut().for_each(|m| *m /= k);
    Ok(LossOutput {
        value: dot(c_hat, w_star) - mean_obj / k,
        grad_c_hat: w_star.iter().zip(&mean_w).map(|(a, b)| a - b).collect(),
        solver_calls: SolverCalls {
            blp: samples as u64,
            ..Default::default()
        },
    })
}

/// Method identifiers accepted by the training harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum MethodId {
    TwoStage,
    CaveE,
    CavePlus,
    CaveH,
    SpoPlus,
    Pfyl,
}

impl MethodId {
    pub const ALL: [MethodId; 6] = [
        MethodId::TwoStage,
        MethodId::CaveE,
        MethodId::CavePlus,
        MethodId::CaveH,
        MethodId::SpoPlus,
        MethodId::Pfyl,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MethodId::TwoStage => "2stage",
            MethodId::CaveE => "cave-e",
            MethodId::CavePlus => "cave+",
            MethodId::CaveH => "cave-h",
            MethodId::SpoPlus => "spo+",
            MethodId::Pfyl => "pfyl",
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        MethodId::ALL
            .into_iter()
            .find(|m| m.as_str() == key)
            .ok_or_else(|| {
                Error::config(
                    "methods",
                    format!("unknown method `{s}` (expected one of 2stage, cave-e, cave+, cave-h, spo+, pfyl)"),
                )
            })
    }
}

impl From<MethodId> for String {
    fn from(m: MethodId) -> String {
        m.as_str().to_string()
    }
}

impl TryFrom<String> for MethodId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// A fully parameterized training loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Method {
    TwoStage,
    Cave(CaveVariant),
    SpoPlus,
    Pfyl { sigma: f64, samples: usize },
}

impl Method {
    pub fn id(&self) -> MethodId {
        match self {
            Method::TwoStage => MethodId::TwoStage,
            Method::Cave(v) => match v.kind {
                CaveKind::Exact => MethodId::CaveE,
                CaveKind::Plus => MethodId::CavePlus,
                CaveKind::Hybrid => MethodId::CaveH,
            },
            Method::SpoPlus => MethodId::SpoPlus,
            Method::Pfyl { .. } => MethodId::Pfyl,
        }
    }

    /// Default parameterization of a method.
    pub fn from_id(id: MethodId) -> Self {
        match id {
            MethodId::TwoStage => Method::TwoStage,
            MethodId::CaveE => Method::Cave(CaveVariant::new(CaveKind::Exact)),
            MethodId::CavePlus => Method::Cave(CaveVariant::new(CaveKind::Plus)),
            MethodId::CaveH => Method::Cave(CaveVariant::new(CaveKind::Hybrid)),
            MethodId::SpoPlus => Method::SpoPlus,
            MethodId::Pfyl => Method::Pfyl {
                sigma: 1.0,
                samples: 1,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Method::Cave(v) => v.validate(),
            Method::Pfyl { sigma, samples } => {
                if !(*sigma > 0.0) {
                    return Err(Error::config("pfyl_sigma", "must be positive"));
                }
                if *samples < 1 {
                    return Err(Error::config("pfyl_samples", "must be at least 1"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Evaluates the loss of one sample at prediction `c_hat`.
    pub fn evaluate<O: Oracle + ?Sized, R: Rng + ?Sized>(
        &self,
        c_hat: &[f64],
        c_true: &[f64],
        w_star: &[f64],
        gen: &SubconeGenerators,
        oracle: &O,
        rng: &mut R,
    ) -> Result<LossOutput> {
        match self {
            Method::TwoStage => mse_loss(c_hat, c_true),
            Method::Cave(v) => cave_loss(c_hat, gen, v, rng),
            Method::SpoPlus => spo_plus_grad(c_hat, c_true, w_star, oracle),
            Method::Pfyl { sigma, samples } => {
                pfyl_grad(c_hat, w_star, oracle, *sigma, *samples, rng)
            }
        }
    }
}
