//! Dense numerical kernels sized for desk-scale problems (tens of variables,
//! a few hundred constraints): a row-pivoted linear solve, a two-phase
//! simplex for linear programs, and an active-set solver for convex
//! quadratic programs. All three are deterministic for a fixed input —
//! pivoting and tie-breaking follow fixed index orders, so reruns reproduce
//! results bit for bit.
//!
//! Infeasible and unbounded are legal outcomes reported through
//! [`SolveStatus`], not errors; errors are reserved for malformed input and
//! genuine numerical failure.

mod linear;
mod lp;
mod qp;

pub use linear::{solve_linear_system, solve_linear_systems};
pub use lp::{solve_lp, LinearProgram};
pub use qp::{solve_qp, QuadraticProgram};

pub(crate) use qp::PivotedQr;

use nalgebra::DVector;
use thiserror::Error;

/// Constraint satisfaction slack accepted when classifying a point feasible.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// A pivot below this times the matrix scale marks the system singular.
pub const PIVOT_REL_TOL: f64 = 1e-12;
/// Linear solves must reproduce the right-hand side to this times `1 + ‖b‖∞`.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Accepted residual of the Karush-Kuhn-Tucker conditions at a QP solution.
pub const KKT_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("matrix is singular: pivot {pivot:.3e} below threshold {threshold:.3e} at elimination step {step}")]
    SingularMatrix { step: usize, pivot: f64, threshold: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{what} residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ResidualCheck { what: &'static str, residual: f64, tolerance: f64 },
    #[error("iteration limit of {0} reached without convergence")]
    IterationLimit(usize),
    #[error("variable {index} has lower bound {lower} above upper bound {upper}")]
    BadBounds { index: usize, lower: f64, upper: f64 },
    #[error("{0} contains a non-finite entry")]
    NonFinite(&'static str),
}

/// Optimization direction for a linear program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

/// Termination classification; infeasible and unbounded are ordinary results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Outcome of an LP or QP solve. The solution vector and objective are
/// present exactly when the status is [`Status::Optimal`].
#[derive(Debug, Clone)]
pub struct SolveStatus {
    pub status: Status,
    pub solution: Option<DVector<f64>>,
    pub objective: Option<f64>,
    pub iterations: usize,
}

impl SolveStatus {
    pub(crate) fn optimal(solution: DVector<f64>, objective: f64, iterations: usize) -> SolveStatus {
        SolveStatus { status: Status::Optimal, solution: Some(solution), objective: Some(objective), iterations }
    }

    pub(crate) fn infeasible(iterations: usize) -> SolveStatus {
        SolveStatus { status: Status::Infeasible, solution: None, objective: None, iterations }
    }

    pub(crate) fn unbounded(iterations: usize) -> SolveStatus {
        SolveStatus { status: Status::Unbounded, solution: None, objective: None, iterations }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// Per-variable bounds, `None` meaning unbounded on that side.
pub type VariableBounds = (Option<f64>, Option<f64>);

pub(crate) fn validate_bounds(bounds: &[VariableBounds]) -> Result<(), SolveError> {
    for (index, (lo, up)) in bounds.iter().enumerate() {
        if lo.is_some_and(|v| !v.is_finite()) || up.is_some_and(|v| !v.is_finite()) {
            return Err(SolveError::NonFinite("bounds"));
        }
        if let (Some(l), Some(u)) = (lo, up) {
            if l > u {
                return Err(SolveError::BadBounds { index, lower: *l, upper: *u });
            }
        }
    }
    Ok(())
}
