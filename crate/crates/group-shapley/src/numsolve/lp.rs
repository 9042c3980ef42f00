//! Two-phase dense simplex with Bland's anti-cycling rule.
//!
//! Problems arrive as `min/max c'x  s.t.  A x ≤ b` with optional per-variable
//! bounds and otherwise free variables. Internally everything is rewritten in
//! standard form: bounded variables are shifted, free variables split into a
//! positive and a negative part, rows get slacks, and rows with negative
//! right-hand side get phase-1 artificials. Bland's rule (smallest eligible
//! index enters, smallest basic index leaves on ties) makes termination a
//! theorem rather than a hope, at the cost of a few extra pivots.

use nalgebra::{DMatrix, DVector};

use super::{validate_bounds, Sense, SolveError, SolveStatus, VariableBounds, FEASIBILITY_TOL};

/// `min/max objective·x` subject to `constraints · x ≤ rhs` and optional
/// variable bounds; variables without bounds are free.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: DVector<f64>,
    pub sense: Sense,
    pub constraints: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub bounds: Vec<VariableBounds>,
}

impl LinearProgram {
    pub fn new(
        objective: DVector<f64>,
        sense: Sense,
        constraints: DMatrix<f64>,
        rhs: DVector<f64>,
    ) -> Result<LinearProgram, SolveError> {
        if constraints.ncols() != objective.len() {
            return Err(SolveError::DimensionMismatch(format!(
                "objective has {} entries but constraints have {} columns",
                objective.len(),
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
        if objective.iter().chain(constraints.iter()).chain(rhs.iter()).any(|v| !v.is_finite()) {
            return Err(SolveError::NonFinite("linear program"));
        }
        let n = objective.len();
        Ok(LinearProgram { objective, sense, constraints, rhs, bounds: vec![(None, None); n] })
    }

    pub fn with_bounds(mut self, bounds: Vec<VariableBounds>) -> Result<LinearProgram, SolveError> {
        if bounds.len() != self.objective.len() {
            return Err(SolveError::DimensionMismatch(format!(
                "{} bound pairs for {} variables",
                bounds.len(),
                self.objective.len()
            )));
        }
        validate_bounds(&bounds)?;
        self.bounds = bounds;
        Ok(self)
    }
}

/// How each original variable maps onto the non-negative standard variables.
enum VarMap {
    /// `x = offset + y` (or `offset − y` when `flip`).
    Shifted { col: usize, offset: f64, flip: bool },
    /// Free variable, `x = y⁺ − y⁻`.
    Split { pos: usize, neg: usize },
}

const REDUCED_COST_TOL: f64 = 1e-9;
const PIVOT_ENTRY_TOL: f64 = 1e-9;

/// Solves the LP. Infeasible and unbounded problems are reported in the
/// returned status.
pub fn solve_lp(lp: &LinearProgram) -> Result<SolveStatus, SolveError> {
    validate_bounds(&lp.bounds)?;
    let n = lp.objective.len();
    if n == 0 {
        // Pure feasibility check of constant rows.
        let ok = lp.rhs.iter().all(|b| *b >= -FEASIBILITY_TOL);
        return Ok(if ok {
            SolveStatus::optimal(DVector::zeros(0), 0.0, 0)
        } else {
            SolveStatus::infeasible(0)
        });
    }

    // --- standard-form rewrite -------------------------------------------
    let mut maps = Vec::with_capacity(n);
    let mut n_std = 0usize;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new(); // (std col, upper) for doubly bounded vars
    for (lo, up) in &lp.bounds {
        match (lo, up) {
            (Some(l), u) => {
                if let Some(u) = u {
                    extra_rows.push((n_std, u - l));
                }
                maps.push(VarMap::Shifted { col: n_std, offset: *l, flip: false });
                n_std += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap::Shifted { col: n_std, offset: *u, flip: true });
                n_std += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split { pos: n_std, neg: n_std + 1 });
                n_std += 2;
            }
        }
    }

    let m = lp.constraints.nrows() + extra_rows.len();
    // Standard rows `A' y ≤ b'`.
    let mut a_std = DMatrix::zeros(m, n_std);
    let mut b_std = DVector::zeros(m);
    for r in 0..lp.constraints.nrows() {
        let mut shift = 0.0;
        for (j, map) in maps.iter().enumerate() {
            let coef = lp.constraints[(r, j)];
            match map {
                VarMap::Shifted { col, offset, flip } => {
                    a_std[(r, *col)] = if *flip { -coef } else { coef };
                    shift += coef * offset;
                }
                VarMap::Split { pos, neg } => {
                    a_std[(r, *pos)] = coef;
                    a_std[(r, *neg)] = -coef;
                }
            }
        }
        b_std[r] = lp.rhs[r] - shift;
    }
    for (k, (col, cap)) in extra_rows.iter().enumerate() {
        let r = lp.constraints.nrows() + k;
        a_std[(r, *col)] = 1.0;
        b_std[r] = *cap;
    }

    // Objective over standard variables, always minimized.
    let sign = match lp.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let mut c_std = DVector::zeros(n_std);
    for (j, map) in maps.iter().enumerate() {
        let c = sign * lp.objective[j];
        match map {
            VarMap::Shifted { col, flip, .. } => c_std[*col] = if *flip { -c } else { c },
            VarMap::Split { pos, neg } => {
                c_std[*pos] = c;
                c_std[*neg] = -c;
            }
        }
    }

    // --- tableau with slacks and artificials ------------------------------
    let needs_artificial: Vec<bool> = (0..m).map(|r| b_std[r] < 0.0).collect();
    let n_art = needs_artificial.iter().filter(|x| **x).count();
    let ncols = n_std + m + n_art;
    let mut tab = DMatrix::zeros(m + 1, ncols + 1); // last row = objective, last col = rhs
    let mut basis = vec![0usize; m];
    let mut allowed = vec![true; ncols];
    let mut art_cols = Vec::new();
    let mut next_art = n_std + m;
    for r in 0..m {
        let flip = if needs_artificial[r] { -1.0 } else { 1.0 };
        for c in 0..n_std {
            tab[(r, c)] = flip * a_std[(r, c)];
        }
        tab[(r, n_std + r)] = flip; // slack
        tab[(r, ncols)] = flip * b_std[r];
        if needs_artificial[r] {
            tab[(r, next_art)] = 1.0;
            basis[r] = next_art;
            art_cols.push(next_art);
            next_art += 1;
        } else {
            basis[r] = n_std + r;
        }
    }

    let iteration_cap = 5000 + 200 * (m + ncols);
    let mut iterations = 0usize;

    // Phase 1: minimize the sum of artificials.
    if n_art > 0 {
        for c in 0..=ncols {
            let mut acc = 0.0;
            for r in 0..m {
                if art_cols.contains(&basis[r]) {
                    acc += tab[(r, c)];
                }
            }
            tab[(m, c)] = -acc;
        }
        for &c in &art_cols {
            tab[(m, c)] += 1.0;
        }
        run_simplex(&mut tab, &mut basis, &mut allowed, &art_cols, iteration_cap, &mut iterations)?
            .ok_or(())
            .map_err(|_| SolveError::IterationLimit(iteration_cap))?;
        let phase1 = -tab[(m, ncols)];
        if phase1 > FEASIBILITY_TOL * (1.0 + b_std.abs().max()) {
            return Ok(SolveStatus::infeasible(iterations));
        }
        // Pivot leftover artificials out of the basis where possible; rows
        // that offer no pivot are redundant and stay inert at value zero.
        for r in 0..m {
            if !art_cols.contains(&basis[r]) {
                continue;
            }
            if let Some(c) = (0..n_std + m)
                .find(|c| allowed[*c] && tab[(r, *c)].abs() > PIVOT_ENTRY_TOL)
            {
                pivot(&mut tab, r, c);
                allowed[basis[r]] = false;
                basis[r] = c;
                iterations += 1;
            }
        }
        for &c in &art_cols {
            allowed[c] = false;
        }
    }

    // Phase 2: original objective, basics eliminated from the cost row.
    for c in 0..=ncols {
        let mut acc = if c < n_std { c_std[c] } else { 0.0 };
        for r in 0..m {
            let cb = if basis[r] < n_std { c_std[basis[r]] } else { 0.0 };
            acc -= cb * tab[(r, c)];
        }
        tab[(m, c)] = acc;
    }
    let art_block: Vec<usize> = art_cols.clone();
    match run_simplex(&mut tab, &mut basis, &mut allowed, &art_block, iteration_cap, &mut iterations)? {
        Some(()) => {}
        None => return Ok(SolveStatus::unbounded(iterations)),
    }

    // --- map the standard solution back -----------------------------------
    let mut y = DVector::zeros(n_std);
    for r in 0..m {
        if basis[r] < n_std {
            y[basis[r]] = tab[(r, ncols)];
        }
    }
    let mut x = DVector::zeros(n);
    for (j, map) in maps.iter().enumerate() {
        x[j] = match map {
            VarMap::Shifted { col, offset, flip } => {
                offset + if *flip { -y[*col] } else { y[*col] }
            }
            VarMap::Split { pos, neg } => y[*pos] - y[*neg],
        };
    }

    // Defensive feasibility audit against the original rows.
    let scale = 1.0 + lp.rhs.abs().max().max(x.abs().max());
    let worst = (&lp.constraints * &x - &lp.rhs).iter().fold(0.0f64, |w, v| w.max(*v));
    if worst > 10.0 * FEASIBILITY_TOL * scale {
        return Err(SolveError::ResidualCheck {
            what: "LP feasibility",
            residual: worst,
            tolerance: 10.0 * FEASIBILITY_TOL * scale,
        });
    }
    for (j, (lo, up)) in lp.bounds.iter().enumerate() {
        if lo.is_some_and(|l| x[j] < l - FEASIBILITY_TOL * scale)
            || up.is_some_and(|u| x[j] > u + FEASIBILITY_TOL * scale)
        {
            return Err(SolveError::ResidualCheck {
                what: "LP variable bounds",
                residual: f64::INFINITY,
                tolerance: FEASIBILITY_TOL * scale,
            });
        }
    }

    let objective = lp.objective.dot(&x);
    Ok(SolveStatus::optimal(x, objective, iterations))
}

/// Bland-rule simplex on a tableau whose last row is the reduced-cost row and
/// last column the right-hand side. Returns `Some(())` at optimality, `None`
/// when a column proves the problem unbounded.
fn run_simplex(
    tab: &mut DMatrix<f64>,
    basis: &mut [usize],
    allowed: &mut [bool],
    artificial_cols: &[usize],
    cap: usize,
    iterations: &mut usize,
) -> Result<Option<()>, SolveError> {
    let m = tab.nrows() - 1;
    let ncols = tab.ncols() - 1;
    loop {
        if *iterations > cap {
            return Err(SolveError::IterationLimit(cap));
        }
        // Entering: smallest allowed index with negative reduced cost.
        let Some(enter) = (0..ncols).find(|c| allowed[*c] && tab[(m, *c)] < -REDUCED_COST_TOL)
        else {
            return Ok(Some(()));
        };
        // Leaving: minimum ratio, ties broken by smallest basic variable.
        let mut best: Option<(f64, usize, usize)> = None; // (ratio, basic var, row)
        for r in 0..m {
            let a = tab[(r, enter)];
            if a > PIVOT_ENTRY_TOL {
                let ratio = tab[(r, ncols)] / a;
                let candidate = (ratio, basis[r], r);
                best = Some(match best {
                    None => candidate,
                    Some(cur) => {
                        if ratio < cur.0 - 1e-12
                            || ((ratio - cur.0).abs() <= 1e-12 && basis[r] < cur.1)
                        {
                            candidate
                        } else {
                            cur
                        }
                    }
                });
            }
        }
        let Some((_, _, row)) = best else {
            return Ok(None); // no blocking row: unbounded direction
        };
        let leaving = basis[row];
        pivot(tab, row, enter);
        basis[row] = enter;
        // An artificial that leaves the basis never comes back.
        if artificial_cols.contains(&leaving) {
            allowed[leaving] = false;
        }
        *iterations += 1;
    }
}

fn pivot(tab: &mut DMatrix<f64>, row: usize, col: usize) {
    let p = tab[(row, col)];
    for c in 0..tab.ncols() {
        tab[(row, c)] /= p;
    }
    for r in 0..tab.nrows() {
        if r == row {
            continue;
        }
        let factor = tab[(r, col)];
        if factor == 0.0 {
            continue;
        }
        for c in 0..tab.ncols() {
            tab[(r, c)] -= factor * tab[(row, c)];
        }
    }
}
