//! Inference when the utility table has holes.
//!
//! Re-simulating a structural model for every coalition is expensive, and
//! published counterfactual tables rarely report all `2^n − 2` combinations.
//! Treat the missing utilities as unknowns restricted by linear side
//! information — sign restrictions, monotonicity, plausibility bands — and
//! three quantities remain computable:
//!
//! - per-group **bounds**: the smallest and largest Shapley value a group can
//!   attain over all admissible completions ([`shapley_bound`]), each a
//!   linear program because the value is affine in the missing utilities;
//! - the **minimum-norm selection**: the admissible completion whose
//!   decomposition is closest to an equal split of the grand change
//!   ([`shapley_minimum_norm`]), a convex quadratic program — a conservative
//!   representative precisely because it is the least lopsided attribution
//!   the data still allow;
//! - **infeasibility**: constraints that admit no completion at all, which
//!   is itself informative — the side information contradicts the reported
//!   numbers.
//!
//! [`build_globalization_constraints`] generates the standard sign
//! restrictions for the three-group trade-liberalization pattern in which
//! both missing coalitions are pairs: each missing pair is at least as large
//! as its members when those point the same way, and cannot overshoot the
//! grand change when the remaining group pushes in the same direction. An
//! optional plausibility band boxes the missing pairs directly.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::coalition::{CoalitionError, CoalitionMask, GroupPartition, UtilityTable};
use crate::numsolve::{
    solve_lp, solve_qp, LinearProgram, QuadraticProgram, Sense, SolveError, SolveStatus, Status,
};
use crate::shapley::{affine_shapley_map, AffineShapleyMap, ShapleyError, ShapleyResult};

#[derive(Debug, Error)]
pub enum PartialError {
    #[error(transparent)]
    Coalition(#[from] CoalitionError),
    #[error(transparent)]
    Shapley(#[from] ShapleyError),
    #[error(transparent)]
    Numeric(#[from] SolveError),
    #[error("group index {group} is out of range for {groups} groups")]
    GroupOutOfRange { group: usize, groups: usize },
    #[error("constraint coefficient or right-hand side is not finite")]
    NonFiniteConstraint,
    #[error("constraint references coalition {0}, which is outside the partition")]
    CoalitionOutOfRange(CoalitionMask),
    #[error("table does not fit the sign-constraint pattern: {0}")]
    PatternMismatch(String),
}

/// One summand of a linear constraint: `coef · g(coalition)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintTerm {
    pub coalition: CoalitionMask,
    pub coef: f64,
}

/// A single `Σ coef·g(coalition) ≤ rhs` row. Terms on observed coalitions
/// are substituted as constants; terms on missing ones become variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<ConstraintTerm>,
    pub rhs: f64,
}

/// A conjunction of `≤` rows over coalition utilities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearConstraintSet {
    pub constraints: Vec<Constraint>,
}

impl LinearConstraintSet {
    pub fn new(constraints: Vec<Constraint>) -> LinearConstraintSet {
        LinearConstraintSet { constraints }
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }
}

/// Which end of a group's attainable range to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Lower,
    Upper,
}

/// How a `[0.5, 1.5]` plausibility band on a missing entry is read when the
/// benchmark statistic is normalized to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxMode {
    /// The band applies to the reported *change* itself: `0.5 ≤ g̃ ≤ 1.5`.
    Difference,
    /// The band applies to the counterfactual *level*; subtracting the unit
    /// benchmark gives `−0.5 ≤ g̃ ≤ 0.5`.
    Level,
}

/// Everything [`shapley_minimum_norm`] can say about a partially observed
/// table: per-group bound programs in group order, the minimum-norm
/// decomposition, and the completion that attains it.
#[derive(Debug, Clone)]
pub struct PartialInferenceResult {
    pub partition: GroupPartition,
    /// Lower-bound program per group; `objective` holds the bound when
    /// optimal, and the status records unbounded or infeasible outcomes.
    pub lower: Vec<SolveStatus>,
    /// Upper-bound program per group, same conventions.
    pub upper: Vec<SolveStatus>,
    /// The decomposition closest to an equal split, when one exists.
    pub smns: Option<ShapleyResult>,
    /// The admissible completion behind `smns`.
    pub completed: Option<UtilityTable>,
    /// False when the constraints admit no completion.
    pub feasible: bool,
}

/// The table and constraints reduced to the missing entries: `φ = var·x +
/// constant` and `a·x ≤ b` with one variable per missing coalition in
/// canonical order.
struct ReducedProblem {
    missing: Vec<CoalitionMask>,
    map: AffineShapleyMap,
    var: DMatrix<f64>,
    constant: DVector<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
}

fn reduce(table: &UtilityTable, set: &LinearConstraintSet) -> Result<ReducedProblem, PartialError> {
    let n = table.partition().len();
    let map = affine_shapley_map(table.partition())?;
    let missing = table.missing();
    let index: HashMap<u32, usize> =
        missing.iter().enumerate().map(|(k, m)| (m.0, k)).collect();

    // φ(x) split into the observed constant and the missing-entry columns.
    let mut constant = table.grand() * map.grand_coef();
    let mut var = DMatrix::zeros(n, missing.len());
    for (col, mask) in map.coalitions().iter().enumerate() {
        match table.value(*mask) {
            Some(v) => constant += v * map.linear().column(col),
            None => {
                let k = index[&mask.0];
                var.set_column(k, &map.linear().column(col));
            }
        }
    }

    // Constraint rows with observed utilities substituted out.
    let rows = set.constraints.len();
    let mut a = DMatrix::zeros(rows, missing.len());
    let mut b = DVector::zeros(rows);
    for (r, constraint) in set.constraints.iter().enumerate() {
        if !constraint.rhs.is_finite() {
            return Err(PartialError::NonFiniteConstraint);
        }
        b[r] = constraint.rhs;
        for term in &constraint.terms {
            if !term.coef.is_finite() {
                return Err(PartialError::NonFiniteConstraint);
            }
            if term.coalition.0 >> n != 0 {
                return Err(PartialError::CoalitionOutOfRange(term.coalition));
            }
            match table.value(term.coalition) {
                Some(v) => b[r] -= term.coef * v,
                None => a[(r, index[&term.coalition.0])] += term.coef,
            }
        }
    }
    Ok(ReducedProblem { missing, map, var, constant, a, b })
}

fn bound_program(
    reduced: &ReducedProblem,
    group: usize,
    direction: Direction,
) -> Result<SolveStatus, PartialError> {
    let objective = reduced.var.row(group).transpose();
    let sense = match direction {
        Direction::Lower => Sense::Min,
        Direction::Upper => Sense::Max,
    };
    let lp = LinearProgram::new(objective, sense, reduced.a.clone(), reduced.b.clone())?;
    let mut status = solve_lp(&lp)?;
    if let Some(obj) = status.objective.as_mut() {
        *obj += reduced.constant[group];
    }
    Ok(status)
}

/// The tightest bound on one group's Shapley value over all completions
/// admitted by the constraints. The value is affine in the missing entries,
/// so each bound is one linear program; unbounded and infeasible outcomes
/// are reported in the status. With nothing missing this collapses to the
/// exact value.
pub fn shapley_bound(
    table: &UtilityTable,
    constraints: &LinearConstraintSet,
    group: usize,
    direction: Direction,
) -> Result<SolveStatus, PartialError> {
    let n = table.partition().len();
    if group >= n {
        return Err(PartialError::GroupOutOfRange { group, groups: n });
    }
    let reduced = reduce(table, constraints)?;
    bound_program(&reduced, group, direction)
}

/// Bounds for every group plus the admissible decomposition closest to an
/// equal split of the grand change (the minimum-norm selection), found by a
/// convex quadratic program over the missing entries.
pub fn shapley_minimum_norm(
    table: &UtilityTable,
    constraints: &LinearConstraintSet,
) -> Result<PartialInferenceResult, PartialError> {
    let n = table.partition().len();
    let reduced = reduce(table, constraints)?;
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut feasible = true;
    for group in 0..n {
        let lo = bound_program(&reduced, group, Direction::Lower)?;
        let hi = bound_program(&reduced, group, Direction::Upper)?;
        feasible &= lo.status != Status::Infeasible && hi.status != Status::Infeasible;
        lower.push(lo);
        upper.push(hi);
    }

    let (smns, completed) = if feasible {
        let target = reduced.var.clone();
        let offset = &reduced.constant - DVector::from_element(n, table.grand() / n as f64);
        let qp = QuadraticProgram::new(target, offset, reduced.a.clone(), reduced.b.clone())?;
        let solved = solve_qp(&qp)?;
        match solved.status {
            Status::Optimal => {
                let x = solved.solution.expect("optimal QP carries a point");
                let mut full = table.clone();
                for (k, mask) in reduced.missing.iter().enumerate() {
                    full = full.with_value(*mask, x[k])?;
                }
                let result = reduced.map.apply(&full)?;
                (Some(result), Some(full))
            }
            _ => {
                feasible = false;
                (None, None)
            }
        }
    } else {
        (None, None)
    };

    Ok(PartialInferenceResult {
        partition: table.partition().clone(),
        lower,
        upper,
        smns,
        completed,
        feasible,
    })
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Emits the sign restrictions for the three-group pattern in which the two
/// missing coalitions are pairs and all singletons were simulated (the shape
/// of published trade-liberalization tables: two reform groups, one
/// globalization group, pairs involving the globalization group missing).
///
/// For a missing pair `{i, j}` with remaining group `r`, writing `g̃` for
/// its unknown utility:
///
/// 1. `g({i})·sgn(g({j})) ≤ g̃` — with aligned partners, the pair does at
///    least as much as each member alone;
/// 2. `g({j})·sgn(g({i})) ≤ g̃` — symmetrically;
/// 3. `g̃·sgn(g({r})) ≤ g(Π)` — when the remaining group pushes the same
///    way, the pair cannot overshoot the grand change.
///
/// Rows are emitted literally, including zero coefficients when a singleton
/// utility is exactly zero. `box_mode` adds the `[0.5, 1.5]` plausibility
/// band on each missing pair under the chosen reading.
pub fn build_globalization_constraints(
    table: &UtilityTable,
    box_mode: Option<BoxMode>,
) -> Result<LinearConstraintSet, PartialError> {
    let n = table.partition().len();
    if n != 3 {
        return Err(PartialError::PatternMismatch(format!(
            "expected exactly three groups, got {n}"
        )));
    }
    let missing = table.missing();
    if missing.len() != 2 {
        return Err(PartialError::PatternMismatch(format!(
            "expected exactly two missing coalitions, found {}",
            missing.len()
        )));
    }
    for mask in &missing {
        if mask.size() != 2 {
            return Err(PartialError::PatternMismatch(format!(
                "missing coalition {mask} is not a two-group pair"
            )));
        }
    }
    let singleton = |j: usize| -> Result<f64, PartialError> {
        table.value(CoalitionMask::singleton(j)).ok_or_else(|| {
            PartialError::PatternMismatch(format!("singleton utility for group {j} is missing"))
        })
    };

    let mut rows = Vec::new();
    for pair in &missing {
        let mut members = pair.indices();
        let i = members.next().expect("pair has two members");
        let j = members.next().expect("pair has two members");
        let r = (0..3).find(|k| !pair.contains(*k)).expect("three groups leave one out");
        let (gi, gj, gr) = (singleton(i)?, singleton(j)?, singleton(r)?);
        rows.push(Constraint {
            terms: vec![
                ConstraintTerm { coalition: CoalitionMask::singleton(i), coef: sign(gj) },
                ConstraintTerm { coalition: *pair, coef: -1.0 },
            ],
            rhs: 0.0,
        });
        rows.push(Constraint {
            terms: vec![
                ConstraintTerm { coalition: CoalitionMask::singleton(j), coef: sign(gi) },
                ConstraintTerm { coalition: *pair, coef: -1.0 },
            ],
            rhs: 0.0,
        });
        rows.push(Constraint {
            terms: vec![ConstraintTerm { coalition: *pair, coef: sign(gr) }],
            rhs: table.grand(),
        });
    }
    if let Some(mode) = box_mode {
        let (lo, hi) = match mode {
            BoxMode::Difference => (0.5, 1.5),
            BoxMode::Level => (-0.5, 0.5),
        };
        for pair in &missing {
            rows.push(Constraint {
                terms: vec![ConstraintTerm { coalition: *pair, coef: 1.0 }],
                rhs: hi,
            });
            rows.push(Constraint {
                terms: vec![ConstraintTerm { coalition: *pair, coef: -1.0 }],
                rhs: -lo,
            });
        }
    }
    Ok(LinearConstraintSet::new(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapley::{cls_shapley, evaluate_table};
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn partition3() -> GroupPartition {
        GroupPartition::from_labels(["cf", "ta", "tc"]).unwrap()
    }

    /// The trade-liberalization revenue-share row: singletons and the
    /// reform pair observed, both globalization pairs missing. Utilities are
    /// changes against a benchmark normalized to one.
    fn revenue_share_table() -> UtilityTable {
        UtilityTable::new(
            partition3(),
            [
                (CoalitionMask::singleton(0), 0.02),
                (CoalitionMask::singleton(1), 0.36),
                (CoalitionMask::singleton(2), 1.01),
                (CoalitionMask::from_indices([0, 1]), 0.39),
            ],
            1.50,
        )
        .unwrap()
    }

    /// A row whose sign restrictions contradict the grand change: the pair
    /// {0,2} must reach at least −0.03 yet stay below −0.06.
    fn job_turnover_table() -> UtilityTable {
        UtilityTable::new(
            partition3(),
            [
                (CoalitionMask::singleton(0), -0.10),
                (CoalitionMask::singleton(1), 0.01),
                (CoalitionMask::singleton(2), 0.03),
                (CoalitionMask::from_indices([0, 1]), -0.08),
            ],
            -0.06,
        )
        .unwrap()
    }

    #[test]
    fn complete_tables_collapse_to_the_exact_value() {
        let table = UtilityTable::complete(
            partition3(),
            &[0.1, 0.2, 0.3, 0.35, 0.45, 0.55],
            0.7,
        )
        .unwrap();
        let exact = cls_shapley(&mut evaluate_table(&table), table.partition()).unwrap();
        let result = shapley_minimum_norm(&table, &LinearConstraintSet::default()).unwrap();
        assert!(result.feasible);
        for j in 0..3 {
            let lo = result.lower[j].objective.unwrap();
            let hi = result.upper[j].objective.unwrap();
            assert_abs_diff_eq!(lo, exact.values[j], epsilon = 1e-10);
            assert_abs_diff_eq!(hi, exact.values[j], epsilon = 1e-10);
        }
        let smns = result.smns.unwrap();
        for j in 0..3 {
            assert_abs_diff_eq!(smns.values[j], exact.values[j], epsilon = 1e-10);
        }
    }

    #[test]
    fn unconstrained_missing_entries_leave_bounds_unbounded() {
        let table = revenue_share_table();
        let lo = shapley_bound(&table, &LinearConstraintSet::default(), 0, Direction::Lower)
            .unwrap();
        assert_eq!(lo.status, Status::Unbounded);
    }

    #[test]
    fn revenue_share_bounds_match_hand_vertex_enumeration() {
        // Sign rows reduce to the box [1.01, 1.5]² on the two missing pairs;
        // the value is affine in them, so the bounds sit at box corners.
        // Worked by hand: c = (103/300, 154/300, 193/300) and the missing
        // columns carry coefficients ±1/6, ∓1/3, 1/6 per group.
        let table = revenue_share_table();
        let set = build_globalization_constraints(&table, None).unwrap();
        assert_eq!(set.len(), 6);
        let result = shapley_minimum_norm(&table, &set).unwrap();
        assert!(result.feasible);
        let slb = [7.0 / 600.0, 109.0 / 600.0, 0.98];
        let sub = [77.0 / 300.0, 128.0 / 300.0, 3.43 / 3.0];
        for j in 0..3 {
            assert_eq!(result.lower[j].status, Status::Optimal);
            assert_abs_diff_eq!(result.lower[j].objective.unwrap(), slb[j], epsilon = 1e-9);
            assert_abs_diff_eq!(result.upper[j].objective.unwrap(), sub[j], epsilon = 1e-9);
        }
        // The equal-split pull lands on the (1.01, 1.01) corner, giving the
        // minimum-norm decomposition (0.175, 0.345, 0.98).
        let smns = result.smns.unwrap();
        assert_abs_diff_eq!(smns.values[0], 0.175, epsilon = 1e-8);
        assert_abs_diff_eq!(smns.values[1], 0.345, epsilon = 1e-8);
        assert_abs_diff_eq!(smns.values[2], 0.98, epsilon = 1e-8);
        assert_abs_diff_eq!(smns.efficiency_gap(), 0.0, epsilon = 1e-10);
        let completed = result.completed.unwrap();
        assert_abs_diff_eq!(
            completed.value(CoalitionMask::from_indices([0, 2])).unwrap(),
            1.01,
            epsilon = 1e-8
        );
    }

    #[test]
    fn bounds_bracket_every_admissible_completion() {
        let table = revenue_share_table();
        let set = build_globalization_constraints(&table, None).unwrap();
        let result = shapley_minimum_norm(&table, &set).unwrap();
        let map = affine_shapley_map(table.partition()).unwrap();
        let target = table.grand() / 3.0;
        let smns = result.smns.as_ref().unwrap();
        let smns_dist: f64 =
            smns.values.iter().map(|v| (v - target) * (v - target)).sum();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let x1 = rng.random_range(1.01..1.5);
            let x2 = rng.random_range(1.01..1.5);
            let full = table
                .with_value(CoalitionMask::from_indices([0, 2]), x1)
                .unwrap()
                .with_value(CoalitionMask::from_indices([1, 2]), x2)
                .unwrap();
            let phi = map.apply(&full).unwrap();
            for j in 0..3 {
                assert!(phi.values[j] >= result.lower[j].objective.unwrap() - 1e-9);
                assert!(phi.values[j] <= result.upper[j].objective.unwrap() + 1e-9);
            }
            // No admissible completion sits closer to the equal split.
            let dist: f64 =
                phi.values.iter().map(|v| (v - target) * (v - target)).sum();
            assert!(dist >= smns_dist - 1e-9);
        }
    }

    #[test]
    fn contradictory_sign_rows_come_back_infeasible() {
        let table = job_turnover_table();
        let set = build_globalization_constraints(&table, None).unwrap();
        let result = shapley_minimum_norm(&table, &set).unwrap();
        assert!(!result.feasible);
        assert!(result.smns.is_none());
        assert!(result.completed.is_none());
        assert!(result.lower.iter().all(|s| s.status == Status::Infeasible));
    }

    #[test]
    fn plausibility_band_readings_differ() {
        let table = revenue_share_table();
        // Sign rows force the pairs above 1.01, so the difference band
        // [0.5, 1.5] adds only the inactive ceiling: bounds unchanged.
        let diff = build_globalization_constraints(&table, Some(BoxMode::Difference)).unwrap();
        assert_eq!(diff.len(), 10);
        let with_band = shapley_minimum_norm(&table, &diff).unwrap();
        let signs_only =
            shapley_minimum_norm(&table, &build_globalization_constraints(&table, None).unwrap())
                .unwrap();
        for j in 0..3 {
            assert_abs_diff_eq!(
                with_band.lower[j].objective.unwrap(),
                signs_only.lower[j].objective.unwrap(),
                epsilon = 1e-9
            );
            assert_abs_diff_eq!(
                with_band.upper[j].objective.unwrap(),
                signs_only.upper[j].objective.unwrap(),
                epsilon = 1e-9
            );
        }
        // The level reading caps the pairs at 0.5, below the 1.01 floor.
        let level = build_globalization_constraints(&table, Some(BoxMode::Level)).unwrap();
        let result = shapley_minimum_norm(&table, &level).unwrap();
        assert!(!result.feasible);
    }

    #[test]
    fn zero_singletons_emit_literal_zero_coefficients() {
        let table = UtilityTable::new(
            partition3(),
            [
                (CoalitionMask::singleton(0), 0.2),
                (CoalitionMask::singleton(1), 0.0),
                (CoalitionMask::singleton(2), 0.4),
                (CoalitionMask::from_indices([0, 1]), 0.3),
            ],
            1.0,
        )
        .unwrap();
        let set = build_globalization_constraints(&table, None).unwrap();
        assert_eq!(set.len(), 6);
        let zero_terms: usize = set
            .constraints
            .iter()
            .flat_map(|c| c.terms.iter())
            .filter(|t| t.coef == 0.0)
            .count();
        // Group 1's zero utility zeroes the remaining-group row of the pair
        // {0,2} and one member row of the pair {1,2} — kept, not dropped.
        assert_eq!(zero_terms, 2);
    }

    #[test]
    fn pattern_violations_are_reported() {
        let two = GroupPartition::from_labels(["a", "b"]).unwrap();
        let table = UtilityTable::new(two, [(CoalitionMask::singleton(0), 0.1)], 1.0).unwrap();
        assert!(matches!(
            build_globalization_constraints(&table, None),
            Err(PartialError::PatternMismatch(_))
        ));
        let complete =
            UtilityTable::complete(partition3(), &[0.1; 6], 1.0).unwrap();
        assert!(matches!(
            build_globalization_constraints(&complete, None),
            Err(PartialError::PatternMismatch(_))
        ));
        // A missing singleton breaks the pattern even with two holes.
        let odd = UtilityTable::new(
            partition3(),
            [
                (CoalitionMask::singleton(0), 0.1),
                (CoalitionMask::singleton(1), 0.2),
                (CoalitionMask::from_indices([0, 1]), 0.3),
                (CoalitionMask::from_indices([1, 2]), 0.4),
            ],
            1.0,
        )
        .unwrap();
        assert!(matches!(
            build_globalization_constraints(&odd, None),
            Err(PartialError::PatternMismatch(_))
        ));
    }

    #[test]
    fn equality_pins_collapse_the_bounds() {
        let table = revenue_share_table();
        let p02 = CoalitionMask::from_indices([0, 2]);
        let p12 = CoalitionMask::from_indices([1, 2]);
        let mut rows = Vec::new();
        for (mask, v) in [(p02, 1.2), (p12, 1.3)] {
            rows.push(Constraint {
                terms: vec![ConstraintTerm { coalition: mask, coef: 1.0 }],
                rhs: v,
            });
            rows.push(Constraint {
                terms: vec![ConstraintTerm { coalition: mask, coef: -1.0 }],
                rhs: -v,
            });
        }
        let result = shapley_minimum_norm(&table, &LinearConstraintSet::new(rows)).unwrap();
        let pinned = table
            .with_value(p02, 1.2)
            .unwrap()
            .with_value(p12, 1.3)
            .unwrap();
        let exact = cls_shapley(&mut evaluate_table(&pinned), pinned.partition()).unwrap();
        for j in 0..3 {
            assert_abs_diff_eq!(
                result.lower[j].objective.unwrap(),
                exact.values[j],
                epsilon = 1e-8
            );
            assert_abs_diff_eq!(
                result.upper[j].objective.unwrap(),
                exact.values[j],
                epsilon = 1e-8
            );
            assert_abs_diff_eq!(
                result.smns.as_ref().unwrap().values[j],
                exact.values[j],
                epsilon = 1e-7
            );
        }
    }

    #[test]
    fn constraints_are_validated() {
        let table = revenue_share_table();
        let bad_mask = LinearConstraintSet::new(vec![Constraint {
            terms: vec![ConstraintTerm { coalition: CoalitionMask(0b1000), coef: 1.0 }],
            rhs: 0.0,
        }]);
        assert!(matches!(
            shapley_bound(&table, &bad_mask, 0, Direction::Lower),
            Err(PartialError::CoalitionOutOfRange(_))
        ));
        let bad_coef = LinearConstraintSet::new(vec![Constraint {
            terms: vec![ConstraintTerm {
                coalition: CoalitionMask::singleton(0),
                coef: f64::NAN,
            }],
            rhs: 0.0,
        }]);
        assert!(matches!(
            shapley_bound(&table, &bad_coef, 0, Direction::Lower),
            Err(PartialError::NonFiniteConstraint)
        ));
        assert!(matches!(
            shapley_bound(&table, &LinearConstraintSet::default(), 7, Direction::Lower),
            Err(PartialError::GroupOutOfRange { group: 7, .. })
        ));
    }
}
