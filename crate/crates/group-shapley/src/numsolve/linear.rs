//! Gaussian elimination with partial (row) pivoting for small dense systems.

use nalgebra::{DMatrix, DVector};

use super::{SolveError, PIVOT_REL_TOL, RESIDUAL_TOL};

/// Solves the square system `A x = b` by row-pivoted Gaussian elimination.
///
/// A pivot smaller than `PIVOT_REL_TOL` times the matrix scale reports the
/// matrix singular. The solution is verified a posteriori:
/// `‖A x − b‖∞ ≤ RESIDUAL_TOL · (1 + ‖b‖∞)`, and a violation is an error
/// rather than a silently inaccurate answer.
pub fn solve_linear_system(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>, SolveError> {
    let x = solve_linear_systems(a, &DMatrix::from_column_slice(b.len(), 1, b.as_slice()))?;
    Ok(DVector::from_column_slice(x.column(0).as_slice()))
}

/// Same elimination with several right-hand sides, one per column of `b`.
pub fn solve_linear_systems(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>, SolveError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(SolveError::DimensionMismatch(format!(
            "matrix is {}x{}, expected square",
            a.nrows(),
            a.ncols()
        )));
    }
    if b.nrows() != n {
        return Err(SolveError::DimensionMismatch(format!(
            "right-hand side has {} rows for a {n}x{n} matrix",
            b.nrows()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite()) {
        return Err(SolveError::NonFinite("linear system"));
    }

    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let threshold = PIVOT_REL_TOL * scale;

    let mut work = a.clone();
    let mut rhs = b.clone();
    for step in 0..n {
        // Pick the largest remaining entry in this column as the pivot row.
        let (pivot_row, pivot) = (step..n)
            .map(|r| (r, work[(r, step)].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty pivot search");
        if pivot <= threshold {
            return Err(SolveError::SingularMatrix { step, pivot, threshold });
        }
        if pivot_row != step {
            work.swap_rows(step, pivot_row);
            rhs.swap_rows(step, pivot_row);
        }
        for r in step + 1..n {
            let factor = work[(r, step)] / work[(step, step)];
            if factor == 0.0 {
                continue;
            }
            for c in step..n {
                work[(r, c)] -= factor * work[(step, c)];
            }
            for c in 0..rhs.ncols() {
                rhs[(r, c)] -= factor * rhs[(step, c)];
            }
        }
    }
    // Back substitution.
    let mut x = DMatrix::zeros(n, b.ncols());
    for c in 0..b.ncols() {
        for r in (0..n).rev() {
            let mut acc = rhs[(r, c)];
            for k in r + 1..n {
                acc -= work[(r, k)] * x[(k, c)];
            }
            x[(r, c)] = acc / work[(r, r)];
        }
    }

    let residual = (a * &x - b).abs().max();
    let tolerance = RESIDUAL_TOL * (1.0 + b.abs().max());
    if residual > tolerance {
        return Err(SolveError::ResidualCheck { what: "linear solve", residual, tolerance });
    }
    Ok(x)
}
