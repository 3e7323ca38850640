//! Optimal subcones of binary linear programs.
//!
//! For `min c·w  s.t.  Aw ≤ b, w ∈ {0,1}^d` the normal cone of the LP
//! relaxation at a binary vertex `w*` is generated by the negated rows of the
//! binding inequalities, both signs of every equality row, `+e_i` for each
//! variable at its lower bound and `-e_i` for each variable at its upper bound.
//! Any cost vector in that cone makes `w*` optimal for the relaxation, hence
//! for the binary program as well.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::projection::{project_exact, QpSettings};

/// Default absolute tolerance for deciding that a row is binding.
pub const DEFAULT_BINDING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    /// `a·w ≤ b`
    Le,
    /// `a·w = b`
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn le(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self {
            coeffs,
            sense: Sense::Le,
            rhs,
        }
    }

    pub fn eq(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self {
            coeffs,
            sense: Sense::Eq,
            rhs,
        }
    }
}

/// Explicit linear constraints over `dim` binary variables. The `[0,1]` box is
/// implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub dim: usize,
    pub rows: Vec<LinearConstraint>,
}

impl ConstraintSystem {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: LinearConstraint) {
        assert_eq!(row.coeffs.len(), self.dim, "constraint row has wrong width");
        self.rows.push(row);
    }
}

/// Which constraint or bound produced a generator row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    Inequality(usize),
    EqualityPos(usize),
    EqualityNeg(usize),
    LowerBound(usize),
    UpperBound(usize),
}

/// Ray generators of the optimal subcone of one instance, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SubconeGenerators {
    rows: DMatrix<f64>,
    provenance: Vec<Provenance>,
}

impl SubconeGenerators {
    /// Builds the generator set, scaling every row to unit length.
    pub fn new(mut rows: DMatrix<f64>, provenance: Vec<Provenance>) -> Result<Self> {
        if rows.nrows() == 0 {
            return Err(Error::Internal("subcone has no generators".into()));
        }
        if provenance.len() != rows.nrows() {
            return Err(Error::DimensionMismatch {
                context: "subcone provenance",
                expected: rows.nrows(),
                got: provenance.len(),
            });
        }
        for mut row in rows.row_iter_mut() {
            let n = row.norm();
            if n == 0.0 || !n.is_finite() {
                return Err(Error::InvalidInput("generator row has zero or non-finite norm".into()));
            }
            row /= n;
        }
        Ok(Self { rows, provenance })
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn row(&self, j: usize) -> Vec<f64> {
        self.rows.row(j).iter().copied().collect()
    }

    /// Mean of the generator rows (the heuristic projection target).
    pub fn row_mean(&self) -> Vec<f64> {
        let m = self.len() as f64;
        (0..self.dim())
            .map(|i| self.rows.column(i).sum() / m)
            .collect()
    }

    /// `Gᵀλ`.
    pub fn combine(&self, lambda: &[f64]) -> Vec<f64> {
        assert_eq!(lambda.len(), self.len());
        let mut out = vec![0.0; self.dim()];
        for (j, &l) in lambda.iter().enumerate() {
            if l == 0.0 {
                continue;
            }
            for (o, g) in out.iter_mut().zip(self.rows.row(j).iter()) {
                *o += l * g;
            }
        }
        out
    }
}

/// Result of a cone-membership query.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeMembership {
    pub inside: bool,
    /// Distance from the query vector to the cone.
    pub residual: f64,
    pub lambda: Vec<f64>,
}

/// Collects the generators of the optimal subcone at `w_star`.
///
/// Rows within `tol` of equality are binding. Zero rows are ignored.
pub fn extract_generators(
    system: &ConstraintSystem,
    w_star: &[f64],
    tol: f64,
) -> Result<SubconeGenerators> {
    if !(tol > 0.0) {
        return Err(Error::config("tol", "binding tolerance must be positive"));
    }
    if w_star.len() != system.dim {
        return Err(Error::DimensionMismatch {
            context: "extract_generators",
            expected: system.dim,
            got: w_star.len(),
        });
    }
    for (index, &value) in w_star.iter().enumerate() {
        if !(value.abs() <= tol || (value - 1.0).abs() <= tol) {
            return Err(Error::NotBinary { index, value });
        }
    }

    let d = system.dim;
    let mut data: Vec<f64> = Vec::new();
    let mut provenance = Vec::new();
    let mut emit = |row: &mut dyn Iterator<Item = f64>, tag: Provenance| {
        data.extend(row);
        provenance.push(tag);
    };

    for (j, row) in system.rows.iter().enumerate() {
        let lhs: f64 = row.coeffs.iter().zip(w_star).map(|(a, w)| a * w).sum();
        let slack = lhs - row.rhs;
        match row.sense {
            Sense::Le if slack > tol => {
                return Err(Error::Infeasible(format!(
                    "inequality row {j} violated: lhs {lhs} > rhs {}",
                    row.rhs
                )));
            }
            Sense::Eq if slack.abs() > tol => {
                return Err(Error::Infeasible(format!(
                    "equality row {j} violated: lhs {lhs} != rhs {}",
                    row.rhs
                )));
            }
            _ => {}
        }
        if row.coeffs.iter().all(|&a| a == 0.0) {
            continue;
        }
        match row.sense {
            Sense::Le => {
                if slack.abs() <= tol {
                    emit(&mut row.coeffs.iter().map(|a| -a), Provenance::Inequality(j));
                }
            }
            Sense::Eq => {
                emit(&mut row.coeffs.iter().copied(), Provenance::EqualityPos(j));
                emit(&mut row.coeffs.iter().map(|a| -a), Provenance::EqualityNeg(j));
            }
        }
    }

    for (i, &w) in w_star.iter().enumerate() {
        let (sign, tag) = if w <= tol {
            (1.0, Provenance::LowerBound(i))
        } else {
            (-1.0, Provenance::UpperBound(i))
        };
        emit(
            &mut (0..d).map(|k| if k == i { sign } else { 0.0 }),
            tag,
        );
    }

    if provenance.is_empty() {
        return Err(Error::Internal("no binding rows at a vertex".into()));
    }
    let m = provenance.len();
    let rows = DMatrix::from_row_slice(m, d, &data);
    SubconeGenerators::new(rows, provenance)
}

/// Decides whether `c` lies in the cone by projecting it exactly.
pub fn cone_contains(gen: &SubconeGenerators, c: &[f64], tol: f64) -> Result<ConeMembership> {
    if c.len() != gen.dim() {
        return Err(Error::DimensionMismatch {
            context: "cone_contains",
            expected: gen.dim(),
            got: c.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::config("tol", "membership tolerance must be positive"));
    }
    let c_norm = norm(c);
    if c_norm == 0.0 {
        return Ok(ConeMembership {
            inside: true,
            residual: 0.0,
            lambda: vec![0.0; gen.len()],
        });
    }
    let proj = project_exact(gen, c, &QpSettings::exact())?;
    let residual = proj
        .p
        .iter()
        .zip(c)
        .map(|(p, c)| (p - c) * (p - c))
        .sum::<f64>()
        .sqrt();
    Ok(ConeMembership {
        inside: residual <= tol * c_norm.max(1.0),
        residual,
        lambda: proj.lambda,
    })
}
