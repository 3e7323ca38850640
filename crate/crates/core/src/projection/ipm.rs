//! Primal-dual interior-point solver for nonnegative least squares.
//!
//! Solves `min_{λ ≥ 0} ½‖Gᵀλ − ĉ‖²`, written as the QP
//! `min ½λᵀHλ − qᵀλ` with `H = GGᵀ`, `q = Gĉ`, using Mehrotra
//! predictor-corrector steps on `(λ, s)` where `s = Hλ − q` is the dual slack.
//! One predictor-corrector cycle counts as one iteration.
//!
//! The problem is solved for `ĉ/‖ĉ‖` and rescaled, so iterates (and hence
//! capped "inner" solutions) are positively homogeneous in `ĉ`.

use nalgebra::DMatrix;

use super::{ProjectionResult, QpSettings};
use crate::error::{Error, Result};
use crate::linalg::{dot, DenseCholesky};

/// Per-iteration diagnostics, recorded by [`nnls_ipm_traced`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterStats {
    /// Mean complementarity `λᵀs / m` in normalized units, before the step.
    pub mu: f64,
    /// Infinity norm of the dual residual `Hλ − q − s`, before the step.
    pub dual_residual: f64,
    pub step: f64,
    pub sigma: f64,
}

pub fn nnls_ipm(g: &DMatrix<f64>, c_hat: &[f64], settings: &QpSettings) -> Result<ProjectionResult> {
    nnls_ipm_impl(g, c_hat, settings, None)
}

pub fn nnls_ipm_traced(
    g: &DMatrix<f64>,
    c_hat: &[f64],
    settings: &QpSettings,
    trace: &mut Vec<IterStats>,
) -> Result<ProjectionResult> {
    nnls_ipm_impl(g, c_hat, settings, Some(trace))
}

fn max_step(x: &[f64], dx: &[f64]) -> f64 {
    x.iter()
        .zip(dx)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&v, &d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

fn amax(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// `H·x` for the row-major symmetric `m × m` matrix `h`.
fn sym_mul(h: &[f64], x: &[f64]) -> Vec<f64> {
    let m = x.len();
    (0..m).map(|i| dot(&h[i * m..(i + 1) * m], x)).collect()
}

fn nnls_ipm_impl(
    g: &DMatrix<f64>,
    c_hat: &[f64],
    settings: &QpSettings,
    mut trace: Option<&mut Vec<IterStats>>,
) -> Result<ProjectionResult> {
    settings.validate()?;
    let (m, d) = g.shape();
    if m == 0 {
        return Err(Error::InvalidInput("projection needs at least one generator".into()));
    }
    if c_hat.len() != d {
        return Err(Error::DimensionMismatch {
            context: "projection",
            expected: d,
            got: c_hat.len(),
        });
    }
    let scale = c_hat.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !scale.is_finite() {
        return Err(Error::InvalidInput("predicted cost is not finite".into()));
    }
    if scale == 0.0 {
        return Err(Error::InvalidInput("cannot project a zero cost vector".into()));
    }
    let c: Vec<f64> = c_hat.iter().map(|v| v / scale).collect();

    // Columns of Gᵀ are the generator rows, stored contiguously.
    let gt = g.transpose();
    let row = |i: usize| gt.column(i);
    let mut h = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let v = dot(row(i).as_slice(), row(j).as_slice());
            h[i * m + j] = v;
            h[j * m + i] = v;
        }
    }
    let q: Vec<f64> = (0..m).map(|i| dot(row(i).as_slice(), &c)).collect();

    // Convergence thresholds in normalized units. The natural residual alone
    // does not bound the error in p; the duality gap λᵀs does (‖Δp‖² ≤ 2λᵀs
    // once the dual residual vanishes).
    let tol = settings.kkt_tol * (1.0 + scale) / scale;
    let gap_tol = tol * tol;

    let mut lambda = vec![1.0; m];
    let mut s = vec![1.0; m];
    let mut iterations = 0;
    let mut converged = false;
    let mut newton = vec![0.0; m * m];

    // Returns (natural residual, dual residual Hλ − q − s).
    let residuals = |lambda: &[f64], s: &[f64]| -> (f64, Vec<f64>) {
        let grad: Vec<f64> = sym_mul(&h, lambda).iter().zip(&q).map(|(a, b)| a - b).collect();
        let natural = lambda
            .iter()
            .zip(&grad)
            .map(|(&l, &gr)| l.min(gr).abs())
            .fold(0.0, f64::max);
        let r_d = grad.iter().zip(s).map(|(a, b)| a - b).collect();
        (natural, r_d)
    };

    let (mut kkt, mut r_d) = residuals(&lambda, &s);
    loop {
        let gap = dot(&lambda, &s);
        if kkt <= tol && gap <= gap_tol && amax(&r_d) <= tol {
            converged = true;
            break;
        }
        if iterations >= settings.max_iters {
            break;
        }
        let mu = gap / m as f64;

        newton.copy_from_slice(&h);
        for i in 0..m {
            newton[i * m + i] += s[i] / lambda[i] + settings.min_regularization;
        }
        let chol = match DenseCholesky::factor(&newton, m) {
            Some(ch) => ch,
            None => {
                log::warn!("singular Newton system after {iterations} iterations");
                break;
            }
        };

        // Predictor: r_c = λ∘s.
        let rhs_aff: Vec<f64> = (0..m).map(|i| -r_d[i] - s[i]).collect();
        let dl_aff = chol.solve(&rhs_aff);
        let ds_aff: Vec<f64> = (0..m).map(|i| -s[i] - s[i] / lambda[i] * dl_aff[i]).collect();
        let alpha_aff = max_step(&lambda, &dl_aff).min(max_step(&s, &ds_aff)).min(1.0);
        let mu_aff = (0..m)
            .map(|i| (lambda[i] + alpha_aff * dl_aff[i]) * (s[i] + alpha_aff * ds_aff[i]))
            .sum::<f64>()
            / m as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(1e-4, 0.9);

        // Corrector: r_c = λ∘s + Δλ_aff∘Δs_aff − σμ.
        let r_c: Vec<f64> = (0..m)
            .map(|i| lambda[i] * s[i] + dl_aff[i] * ds_aff[i] - sigma * mu)
            .collect();
        let rhs: Vec<f64> = (0..m).map(|i| -r_d[i] - r_c[i] / lambda[i]).collect();
        let dl = chol.solve(&rhs);
        let ds: Vec<f64> = (0..m).map(|i| -(r_c[i] + s[i] * dl[i]) / lambda[i]).collect();
        let alpha = (settings.fraction_to_boundary * max_step(&lambda, &dl).min(max_step(&s, &ds)))
            .min(1.0);
        if !alpha.is_finite() || dl.iter().any(|v| !v.is_finite()) {
            log::warn!("non-finite Newton step after {iterations} iterations");
            break;
        }

        if let Some(t) = trace.as_deref_mut() {
            t.push(IterStats {
                mu,
                dual_residual: amax(&r_d),
                step: alpha,
                sigma,
            });
        }

        for i in 0..m {
            lambda[i] += alpha * dl[i];
            s[i] += alpha * ds[i];
        }
        iterations += 1;
        (kkt, r_d) = residuals(&lambda, &s);
    }

    let lambda_out: Vec<f64> = lambda.iter().map(|l| l * scale).collect();
    let mut p = vec![0.0; d];
    for (i, &l) in lambda_out.iter().enumerate() {
        for (pk, gk) in p.iter_mut().zip(row(i).iter()) {
            *pk += l * gk;
        }
    }
    Ok(ProjectionResult {
        p,
        lambda: lambda_out,
        iterations,
        converged,
        kkt_residual: kkt * scale,
    })
}
