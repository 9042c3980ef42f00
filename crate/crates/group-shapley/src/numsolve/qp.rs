//! Primal active-set solver for convex least-squares programs.
//!
//! Problems are stated as `min ‖target·x + offset‖²` subject to
//! `constraints · x ≤ rhs` plus optional variable bounds. The Hessian
//! `2·targetᵀtarget` may be singular — rank deficiency is routine here, so
//! every equality-constrained subproblem is solved through a column-pivoted
//! Householder QR that hands back *basic* least-squares solutions (free
//! components pinned to zero). That keeps the iteration deterministic even
//! when the minimizer set is an affine subspace.
//!
//! The outer loop is the textbook primal active-set method: start from a
//! feasible vertex found by the LP phase-1 machinery, move within the current
//! working set's null space, add the lowest-index blocking row on a partial
//! step, and drop the most negative multiplier (lowest index on ties) when a
//! subspace minimizer is reached. A KKT audit runs before any point is
//! returned as optimal.

use nalgebra::{DMatrix, DVector};

use super::{
    solve_lp, validate_bounds, LinearProgram, Sense, SolveError, SolveStatus, Status,
    VariableBounds, FEASIBILITY_TOL, KKT_TOL,
};

/// `min ‖target·x + offset‖²` subject to `constraints · x ≤ rhs` and optional
/// variable bounds.
#[derive(Debug, Clone)]
pub struct QuadraticProgram {
    pub target: DMatrix<f64>,
    pub offset: DVector<f64>,
    pub constraints: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub bounds: Vec<VariableBounds>,
}

impl QuadraticProgram {
    pub fn new(
        target: DMatrix<f64>,
        offset: DVector<f64>,
        constraints: DMatrix<f64>,
        rhs: DVector<f64>,
    ) -> Result<QuadraticProgram, SolveError> {
        if target.nrows() != offset.len() {
            return Err(SolveError::DimensionMismatch(format!(
                "target has {} rows but offset has {} entries",
                target.nrows(),
                offset.len()
            )));
        }
        if constraints.ncols() != target.ncols() {
            return Err(SolveError::DimensionMismatch(format!(
                "target has {} columns but constraints have {}",
                target.ncols(),
                constraints.ncols()
            )));
        }
        if constraints.nrows() != rhs.len() {
            return Err(SolveError::DimensionMismatch(format!(
                "{} constraint rows but {} right-hand sides",
                constraints.nrows(),
                rhs.len()
            )));
        }
        if target
            .iter()
            .chain(offset.iter())
            .chain(constraints.iter())
            .chain(rhs.iter())
            .any(|v| !v.is_finite())
        {
            return Err(SolveError::NonFinite("quadratic program"));
        }
        let n = target.ncols();
        Ok(QuadraticProgram { target, offset, constraints, rhs, bounds: vec![(None, None); n] })
    }

    pub fn with_bounds(
        mut self,
        bounds: Vec<VariableBounds>,
    ) -> Result<QuadraticProgram, SolveError> {
        if bounds.len() != self.target.ncols() {
            return Err(SolveError::DimensionMismatch(format!(
                "{} bound pairs for {} variables",
                bounds.len(),
                self.target.ncols()
            )));
        }
        validate_bounds(&bounds)?;
        self.bounds = bounds;
        Ok(self)
    }
}

const STEP_TOL: f64 = 1e-10;
const RANK_TOL: f64 = 1e-11;

/// Solves the program. Infeasible constraint systems are reported in the
/// status; the objective of an optimal point is `‖target·x + offset‖²`.
pub fn solve_qp(qp: &QuadraticProgram) -> Result<SolveStatus, SolveError> {
    validate_bounds(&qp.bounds)?;
    let n = qp.target.ncols();
    if n == 0 {
        let ok = qp.rhs.iter().all(|b| *b >= -FEASIBILITY_TOL);
        return Ok(if ok {
            SolveStatus::optimal(DVector::zeros(0), qp.offset.norm_squared(), 0)
        } else {
            SolveStatus::infeasible(0)
        });
    }

    // Materialize bounds as ordinary rows so the working set is one index
    // space: original rows first, then upper bounds, then lower bounds.
    let mut rows: Vec<(DVector<f64>, f64)> = Vec::new();
    for r in 0..qp.constraints.nrows() {
        rows.push((qp.constraints.row(r).transpose(), qp.rhs[r]));
    }
    for (j, (_, up)) in qp.bounds.iter().enumerate() {
        if let Some(u) = up {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            rows.push((e, *u));
        }
    }
    for (j, (lo, _)) in qp.bounds.iter().enumerate() {
        if let Some(l) = lo {
            let mut e = DVector::zeros(n);
            e[j] = -1.0;
            rows.push((e, -l));
        }
    }
    let m = rows.len();

    // Feasible starting vertex from the simplex phase-1 machinery.
    let feas = solve_lp(
        &LinearProgram::new(
            DVector::zeros(n),
            Sense::Min,
            qp.constraints.clone(),
            qp.rhs.clone(),
        )?
        .with_bounds(qp.bounds.clone())?,
    )?;
    let mut iterations = feas.iterations;
    let mut x = match feas.status {
        Status::Optimal => feas.solution.expect("optimal LP carries a point"),
        Status::Infeasible => return Ok(SolveStatus::infeasible(iterations)),
        Status::Unbounded => unreachable!("zero objective cannot be unbounded"),
    };

    let scale = 1.0
        + rows.iter().fold(0.0f64, |w, (_, b)| w.max(b.abs()))
        + x.abs().max();
    let mut working: Vec<bool> = rows
        .iter()
        .map(|(a, b)| (a.dot(&x) - b).abs() <= FEASIBILITY_TOL * scale)
        .collect();

    let cap = 500 + 20 * (m + n);
    loop {
        if iterations > cap {
            return Err(SolveError::IterationLimit(cap));
        }
        iterations += 1;

        let active: Vec<usize> = (0..m).filter(|i| working[*i]).collect();
        let residual = &qp.target * &x + &qp.offset;

        // Equality-constrained step: p = N z with A_W N = 0 and z the basic
        // least-squares minimizer of ‖(target·N) z + residual‖.
        let nullsp = null_basis_of_rows(&rows, &active, n);
        let p = if nullsp.ncols() == 0 {
            DVector::zeros(n)
        } else {
            let reduced = &qp.target * &nullsp;
            let z = PivotedQr::factor(&reduced).lstsq_basic(&(-&residual));
            &nullsp * z
        };

        if p.abs().max() <= STEP_TOL * (1.0 + x.abs().max()) {
            // Subspace minimizer: examine multipliers of the working set.
            let gradient = 2.0 * qp.target.transpose() * &residual;
            if active.is_empty() {
                audit_kkt(&rows, &x, &gradient, &[], &DVector::zeros(0))?;
                let obj = (&qp.target * &x + &qp.offset).norm_squared();
                return Ok(SolveStatus::optimal(x, obj, iterations));
            }
            let at = DMatrix::from_fn(n, active.len(), |i, k| rows[active[k]].0[i]);
            let lambda = PivotedQr::factor(&at).lstsq_basic(&(-&gradient));
            let mut drop: Option<(f64, usize)> = None; // (multiplier, position)
            for (k, &row) in active.iter().enumerate() {
                if lambda[k] < -KKT_TOL && drop.is_none_or(|(best, _)| lambda[k] < best) {
                    drop = Some((lambda[k], row));
                }
            }
            match drop {
                Some((_, row)) => working[row] = false,
                None => {
                    audit_kkt(&rows, &x, &gradient, &active, &lambda)?;
                    let obj = (&qp.target * &x + &qp.offset).norm_squared();
                    return Ok(SolveStatus::optimal(x, obj, iterations));
                }
            }
            continue;
        }

        // Ratio test against the inactive rows; lowest index wins ties.
        let mut alpha = 1.0f64;
        let mut blocking: Option<usize> = None;
        for (i, (a, b)) in rows.iter().enumerate() {
            if working[i] {
                continue;
            }
            let along = a.dot(&p);
            if along > FEASIBILITY_TOL {
                let room = (b - a.dot(&x)).max(0.0);
                let step = room / along;
                if step < alpha - 1e-12 {
                    alpha = step;
                    blocking = Some(i);
                }
            }
        }
        x += alpha * &p;
        if let Some(i) = blocking {
            working[i] = true;
        }
    }
}

/// Verifies stationarity, feasibility, and multiplier signs before a point is
/// certified optimal.
fn audit_kkt(
    rows: &[(DVector<f64>, f64)],
    x: &DVector<f64>,
    gradient: &DVector<f64>,
    active: &[usize],
    lambda: &DVector<f64>,
) -> Result<(), SolveError> {
    let scale = 1.0 + gradient.abs().max();
    let mut stationarity = gradient.clone();
    for (k, &row) in active.iter().enumerate() {
        stationarity += lambda[k] * &rows[row].0;
    }
    let resid = stationarity.abs().max();
    if resid > KKT_TOL * scale {
        return Err(SolveError::ResidualCheck {
            what: "QP stationarity",
            residual: resid,
            tolerance: KKT_TOL * scale,
        });
    }
    let fscale = 1.0 + rows.iter().fold(0.0f64, |w, (_, b)| w.max(b.abs())) + x.abs().max();
    let worst = rows.iter().fold(0.0f64, |w, (a, b)| w.max(a.dot(x) - b));
    if worst > 10.0 * FEASIBILITY_TOL * fscale {
        return Err(SolveError::ResidualCheck {
            what: "QP feasibility",
            residual: worst,
            tolerance: 10.0 * FEASIBILITY_TOL * fscale,
        });
    }
    Ok(())
}

/// Orthonormal basis for the null space of the active rows (an `n×(n−r)`
/// matrix, possibly with zero columns when the rows span `Rⁿ`).
fn null_basis_of_rows(
    rows: &[(DVector<f64>, f64)],
    active: &[usize],
    n: usize,
) -> DMatrix<f64> {
    if active.is_empty() {
        return DMatrix::identity(n, n);
    }
    let at = DMatrix::from_fn(n, active.len(), |i, k| rows[active[k]].0[i]);
    PivotedQr::factor(&at).null_basis()
}

/// Column-pivoted Householder QR of a dense matrix, `A·P = Q·R`, with the
/// numerical rank read off the pivoted diagonal of `R`.
pub(crate) struct PivotedQr {
    r: DMatrix<f64>,
    householders: Vec<DVector<f64>>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    pub(crate) fn factor(a: &DMatrix<f64>) -> PivotedQr {
        let (p, q) = a.shape();
        let mut r = a.clone();
        let mut perm: Vec<usize> = (0..q).collect();
        let mut householders = Vec::new();
        let overall = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let cutoff = RANK_TOL * overall.max(1.0);
        let steps = p.min(q);
        let mut rank = 0;
        for k in 0..steps {
            // Pivot the trailing column of largest norm into position k.
            let mut best = k;
            let mut best_norm = -1.0;
            for j in k..q {
                let norm2: f64 = (k..p).map(|i| r[(i, j)] * r[(i, j)]).sum();
                if norm2 > best_norm {
                    best_norm = norm2;
                    best = j;
                }
            }
            if best != k {
                r.swap_columns(k, best);
                perm.swap(k, best);
            }
            let col_norm = best_norm.max(0.0).sqrt();
            if col_norm <= cutoff {
                break;
            }
            rank += 1;
            let alpha = if r[(k, k)] >= 0.0 { -col_norm } else { col_norm };
            let mut w = DVector::zeros(p);
            for i in k..p {
                w[i] = r[(i, k)];
            }
            w[k] -= alpha;
            let wnorm = w.norm();
            if wnorm > 0.0 {
                w /= wnorm;
            }
            for j in k..q {
                let dot: f64 = (k..p).map(|i| w[i] * r[(i, j)]).sum();
                for i in k..p {
                    r[(i, j)] -= 2.0 * dot * w[i];
                }
            }
            r[(k, k)] = alpha;
            for i in k + 1..p {
                r[(i, k)] = 0.0;
            }
            householders.push(w);
        }
        PivotedQr { r, householders, perm, rank }
    }

    fn apply_q_transpose(&self, y: &mut DVector<f64>) {
        for w in &self.householders {
            let dot = 2.0 * w.dot(y);
            *y -= dot * w;
        }
    }

    fn apply_q(&self, y: &mut DVector<f64>) {
        for w in self.householders.iter().rev() {
            let dot = 2.0 * w.dot(y);
            *y -= dot * w;
        }
    }

    /// Basic least-squares solution of `min ‖A z − y‖`: back-substitution on
    /// the leading `rank×rank` block, pivoted-out components set to zero.
    pub(crate) fn lstsq_basic(&self, y: &DVector<f64>) -> DVector<f64> {
        let q = self.r.ncols();
        let mut c = y.clone();
        self.apply_q_transpose(&mut c);
        let mut z_piv = DVector::zeros(q);
        for k in (0..self.rank).rev() {
            let mut acc = c[k];
            for j in k + 1..self.rank {
                acc -= self.r[(k, j)] * z_piv[j];
            }
            z_piv[k] = acc / self.r[(k, k)];
        }
        let mut z = DVector::zeros(q);
        for (pos, &orig) in self.perm.iter().enumerate() {
            z[orig] = z_piv[pos];
        }
        z
    }

    /// Orthonormal basis for the orthogonal complement of the column space:
    /// the trailing `p − rank` columns of `Q`.
    pub(crate) fn null_basis(&self) -> DMatrix<f64> {
        let p = self.r.nrows();
        let extra = p - self.rank;
        let mut basis = DMatrix::zeros(p, extra);
        for (j, col) in (self.rank..p).enumerate() {
            let mut e = DVector::zeros(p);
            e[col] = 1.0;
            self.apply_q(&mut e);
            basis.set_column(j, &e);
        }
        basis
    }

    #[cfg(test)]
    pub(crate) fn rank(&self) -> usize {
        self.rank
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn qp(
        m: &[&[f64]],
        v: &[f64],
        a: &[&[f64]],
        b: &[f64],
    ) -> QuadraticProgram {
        let ncols = m[0].len();
        let mf: Vec<f64> = m.iter().flat_map(|r| r.iter().copied()).collect();
        let af: Vec<f64> = a.iter().flat_map(|r| r.iter().copied()).collect();
        QuadraticProgram::new(
            DMatrix::from_row_slice(m.len(), ncols, &mf),
            DVector::from_column_slice(v),
            DMatrix::from_row_slice(a.len(), ncols, &af),
            DVector::from_column_slice(b),
        )
        .unwrap()
    }

    #[test]
    fn projection_onto_halfplane() {
        // min ‖x − (3,4)‖² s.t. x1 + x2 ≤ 5, x ≥ 0: project onto the line.
        let p = qp(
            &[&[1.0, 0.0], &[0.0, 1.0]],
            &[-3.0, -4.0],
            &[&[1.0, 1.0]],
            &[5.0],
        )
        .with_bounds(vec![(Some(0.0), None), (Some(0.0), None)])
        .unwrap();
        let s = solve_qp(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        let x = s.solution.unwrap();
        assert_abs_diff_eq!(x[0], 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(x[1], 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(s.objective.unwrap(), 2.0, epsilon = 1e-8);
    }

    #[test]
    fn interior_optimum_leaves_constraints_inactive() {
        // Unconstrained minimizer (1, 1) already satisfies x1 + x2 ≤ 10.
        let p = qp(
            &[&[2.0, 0.0], &[0.0, 1.0]],
            &[-2.0, -1.0],
            &[&[1.0, 1.0]],
            &[10.0],
        );
        let s = solve_qp(&p).unwrap();
        let x = s.solution.unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(s.objective.unwrap(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn singular_hessian_reaches_zero_objective() {
        // minimize (x1 + x2 − 2)² inside the unit box — a whole segment of
        // minimizers; the solver must land on one of them deterministically.
        let p = qp(&[&[1.0, 1.0]], &[-2.0], &[], &[])
            .with_bounds(vec![(Some(0.0), Some(1.5)); 2])
            .unwrap();
        let s = solve_qp(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert_abs_diff_eq!(s.objective.unwrap(), 0.0, epsilon = 1e-10);
        let x = s.solution.unwrap();
        assert_abs_diff_eq!(x[0] + x[1], 2.0, epsilon = 1e-8);
        let again = solve_qp(&p).unwrap().solution.unwrap();
        assert_eq!(x, again);
    }

    #[test]
    fn equality_encoded_by_opposing_rows() {
        // min ‖x‖² s.t. Σx = 1 → x = (1/3, 1/3, 1/3).
        let p = qp(
            &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]],
            &[0.0, 0.0, 0.0],
            &[&[1.0, 1.0, 1.0], &[-1.0, -1.0, -1.0]],
            &[1.0, -1.0],
        );
        let s = solve_qp(&p).unwrap();
        let x = s.solution.unwrap();
        for j in 0..3 {
            assert_abs_diff_eq!(x[j], 1.0 / 3.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn infeasible_rows_are_reported() {
        let p = qp(&[&[1.0]], &[0.0], &[&[1.0], &[-1.0]], &[0.0, -1.0]);
        assert_eq!(solve_qp(&p).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn grid_search_cannot_beat_the_solver() {
        // min ‖x − (0.9, 0.6)‖² over x ≥ 0, x1 + 2x2 ≤ 1.
        let p = qp(
            &[&[1.0, 0.0], &[0.0, 1.0]],
            &[-0.9, -0.6],
            &[&[1.0, 2.0]],
            &[1.0],
        )
        .with_bounds(vec![(Some(0.0), None), (Some(0.0), None)])
        .unwrap();
        let s = solve_qp(&p).unwrap();
        let best = s.objective.unwrap();
        let steps = 800;
        for i in 0..=steps {
            for j in 0..=steps {
                let x1 = i as f64 / steps as f64;
                let x2 = j as f64 / steps as f64;
                if x1 + 2.0 * x2 <= 1.0 {
                    let obj = (x1 - 0.9).powi(2) + (x2 - 0.6).powi(2);
                    assert!(best <= obj + 1e-9, "grid point ({x1}, {x2}) beats solver");
                }
            }
        }
    }

    #[test]
    fn random_feasible_points_never_beat_the_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(8121);
        for trial in 0..20 {
            let n = rng.random_range(2..=4);
            let k = rng.random_range(1..=3);
            let target = DMatrix::from_fn(k, n, |_, _| rng.random_range(-1.5..1.5));
            let offset = DVector::from_fn(k, |_, _| rng.random_range(-1.0..1.0));
            let a = DMatrix::from_fn(2, n, |_, _| rng.random_range(-1.0..1.0));
            let x0 = DVector::from_fn(n, |_, _| rng.random_range(-0.5..0.5));
            let b = &a * &x0 + DVector::from_fn(2, |_, _| rng.random_range(0.2..1.0));
            let p = QuadraticProgram::new(target.clone(), offset.clone(), a.clone(), b.clone())
                .unwrap()
                .with_bounds(vec![(Some(-2.0), Some(2.0)); n])
                .unwrap();
            let s = solve_qp(&p).unwrap();
            assert_eq!(s.status, Status::Optimal, "trial {trial}");
            let best = s.objective.unwrap();
            let mut tried = 0;
            while tried < 1000 {
                let x = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
                if (&a * &x - &b).iter().any(|v| *v > 0.0) {
                    continue;
                }
                tried += 1;
                let obj = (&target * &x + &offset).norm_squared();
                assert!(best <= obj + 1e-8, "trial {trial}: sampled point beats solver");
            }
        }
    }

    #[test]
    fn pivoted_qr_reports_rank_and_null_space() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let f = PivotedQr::factor(&a);
        assert_eq!(f.rank(), 1);

        // Null space of the single row [1, 1] in R².
        let at = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let f = PivotedQr::factor(&at);
        let n = f.null_basis();
        assert_eq!(n.ncols(), 1);
        assert_abs_diff_eq!(n.column(0).norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(n[(0, 0)] + n[(1, 0)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pivoted_qr_least_squares_matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(90);
        for _ in 0..20 {
            let p = rng.random_range(3..=6);
            let q = rng.random_range(1..=3);
            let a = DMatrix::from_fn(p, q, |_, _| rng.random_range(-2.0..2.0));
            let y = DVector::from_fn(p, |_, _| rng.random_range(-2.0..2.0));
            let z = PivotedQr::factor(&a).lstsq_basic(&y);
            // Normal equations residual: Aᵀ(Az − y) = 0 at the minimizer.
            let resid = a.transpose() * (&a * &z - &y);
            assert!(resid.abs().max() < 1e-9);
        }
    }

    #[test]
    fn deterministic_repeat_solves() {
        let p = qp(
            &[&[1.0, 0.5, 0.0], &[0.0, 1.0, -0.5]],
            &[-1.0, 0.25],
            &[&[1.0, 1.0, 1.0]],
            &[1.5],
        )
        .with_bounds(vec![(Some(-1.0), Some(1.0)); 3])
        .unwrap();
        let a = solve_qp(&p).unwrap();
        let b = solve_qp(&p).unwrap();
        assert_eq!(a.solution.unwrap(), b.solution.unwrap());
        assert_eq!(a.objective.unwrap().to_bits(), b.objective.unwrap().to_bits());
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(QuadraticProgram::new(
            DMatrix::zeros(1, 2),
            DVector::zeros(2),
            DMatrix::zeros(0, 2),
            DVector::zeros(0),
        )
        .is_err());
        let p = qp(&[&[1.0]], &[0.0], &[], &[]);
        assert!(p.with_bounds(vec![(Some(1.0), Some(0.0))]).is_err());
    }
}
