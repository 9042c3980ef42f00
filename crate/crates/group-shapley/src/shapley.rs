//! The group Shapley decomposition and its estimators.
//!
//! A counterfactual exercise moves groups of model parameters from benchmark
//! to counterfactual values and records how a statistic responds. The
//! utility `g(Ψ)` of a coalition of groups is the change produced by moving
//! exactly those groups; `g(∅) = 0` and `g(Π)` is the full observed change.
//! The Shapley value of a group is its marginal contribution averaged over
//! all coalitions it can join, and it is the unique attribution that is
//! linear in the game, gives zero to groups that never matter, treats
//! interchangeable groups equally, and sums to the full change.
//!
//! Five routes to the same number live here:
//!
//! - [`exact_shapley_subtractive`] and [`exact_shapley_additive`] — two
//!   textbook enumeration forms, useful as cross-checks of each other;
//! - [`permutation_oracle`] — the average-over-orderings definition, kept
//!   deliberately naive as an independent oracle for small partitions;
//! - [`cls_shapley`] — the constrained weighted least-squares
//!   characterization: the Shapley value is the additive approximation of
//!   `g` under coalition weights `1/C(n−2, s−1)`, constrained to reproduce
//!   the grand value;
//! - [`sampled_shapley`] — the same least-squares problem on a random
//!   coalition sample, for value functions too expensive to enumerate.
//!
//! [`affine_shapley_map`] precomputes the linear map from utilities to
//! values implied by the least-squares form, which turns repeated
//! decompositions (bootstrap draws, sensitivity sweeps) into a
//! matrix-vector product. [`marginal_value_function`] and
//! [`ceteris_paribus_decomposition`] adapt the machinery to prediction
//! explainers and to the one-at-a-time decompositions the Shapley value
//! replaces.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::coalition::{
    enumerate_proper_coalitions, kernel_weight, CoalitionError, CoalitionMask, GroupPartition,
    UtilityTable, MAX_GROUPS,
};
use crate::numsolve::{solve_linear_systems, PivotedQr, SolveError};

/// Largest partition the permutation oracle will enumerate (`8! = 40320`
/// orderings).
pub const MAX_ORACLE_GROUPS: usize = 8;
/// Largest partition for which the affine map is materialized
/// (`2^12 − 2 = 4094` columns).
pub const MAX_AFFINE_GROUPS: usize = 12;
/// A grand value at or below this (relative to the attribution scale) makes
/// shares meaningless, so they are withheld.
pub const SHARE_DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ShapleyError {
    #[error(transparent)]
    Coalition(#[from] CoalitionError),
    #[error(transparent)]
    Numeric(#[from] SolveError),
    #[error("coalition {0} has no observed utility")]
    MissingCoalition(CoalitionMask),
    #[error("value function returned a non-finite utility for {0}")]
    NonFiniteValue(CoalitionMask),
    #[error("{method} handles {min} to {max} groups, got {groups}")]
    GroupCountRange { groups: usize, min: usize, max: usize, method: &'static str },
    #[error("sampling budget {q} is below the minimum of {minimum}")]
    SampleBudget { q: usize, minimum: usize },
    #[error("the value function must vanish on the empty coalition, got {0}")]
    EmptyValueNotZero(f64),
    #[error("utility table was built for a different partition")]
    PartitionMismatch,
    #[error("partition carries no member lists, so features cannot be grouped")]
    MembersRequired,
    #[error("feature {0:?} is not among the data's feature names")]
    UnknownFeature(String),
    #[error("expected {expected} features, got {got}")]
    FeatureDimension { expected: usize, got: usize },
    #[error("background sample is empty")]
    EmptyBackground,
    #[error("external value function failed on coalition {coalition}: {message}")]
    External { coalition: String, message: String },
}

/// Which route produced a [`ShapleyResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ExactSubtractive,
    ExactAdditive,
    Permutation,
    ConstrainedLeastSquares,
    Sampled,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ExactSubtractive => "exact-subtractive",
            Method::ExactAdditive => "exact-additive",
            Method::Permutation => "permutation",
            Method::ConstrainedLeastSquares => "cls",
            Method::Sampled => "sampled",
        })
    }
}

/// A decomposition: one value per group, summing to the grand value.
#[derive(Debug, Clone)]
pub struct ShapleyResult {
    pub partition: GroupPartition,
    pub values: Vec<f64>,
    pub grand: f64,
    /// `values / grand`, or `None` when the grand value is too close to zero
    /// for shares to mean anything.
    pub shares: Option<Vec<f64>>,
    pub method: Method,
    /// Distinct coalition evaluations spent, when a value function was
    /// involved.
    pub distinct_evaluations: Option<usize>,
}

impl ShapleyResult {
    pub(crate) fn new(
        partition: GroupPartition,
        values: Vec<f64>,
        grand: f64,
        method: Method,
        distinct_evaluations: Option<usize>,
    ) -> ShapleyResult {
        let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let shares = if grand.abs() > SHARE_DEGENERACY_TOL * scale {
            Some(values.iter().map(|v| v / grand).collect())
        } else {
            None
        };
        ShapleyResult { partition, values, grand, shares, method, distinct_evaluations }
    }

    /// `g(Π) − Σ values`; zero up to round-off for every method here.
    pub fn efficiency_gap(&self) -> f64 {
        self.grand - self.values.iter().sum::<f64>()
    }
}

/// A coalition utility, evaluated on demand. `evaluate` receives the
/// coalition of groups moved to their counterfactual setting and returns the
/// induced change in the statistic; the empty coalition must map to zero.
pub trait ValueFunction {
    fn evaluate(&mut self, coalition: CoalitionMask) -> Result<f64, ShapleyError>;

    /// Whether the same coalition always yields the same value. Decomposers
    /// evaluate each coalition at most once either way; impure functions are
    /// simply not safe to cache *across* calls.
    fn is_pure(&self) -> bool {
        true
    }

    /// Rough seconds per evaluation, if known; purely advisory.
    fn cost_hint(&self) -> Option<f64> {
        None
    }
}

impl<F> ValueFunction for F
where
    F: FnMut(CoalitionMask) -> Result<f64, ShapleyError>,
{
    fn evaluate(&mut self, coalition: CoalitionMask) -> Result<f64, ShapleyError> {
        self(coalition)
    }
}

/// Wraps a utility table as a value function; coalitions absent from the
/// table surface as [`ShapleyError::MissingCoalition`].
pub fn evaluate_table(table: &UtilityTable) -> impl ValueFunction + '_ {
    move |coalition: CoalitionMask| {
        table.value(coalition).ok_or(ShapleyError::MissingCoalition(coalition))
    }
}

/// Evaluation cache: every coalition is computed at most once per
/// decomposition, which also keeps stochastic value functions internally
/// consistent.
struct Memo<'a, V: ValueFunction + ?Sized> {
    vf: &'a mut V,
    seen: HashMap<u32, f64>,
}

impl<'a, V: ValueFunction + ?Sized> Memo<'a, V> {
    fn new(vf: &'a mut V) -> Memo<'a, V> {
        Memo { vf, seen: HashMap::new() }
    }

    fn value(&mut self, coalition: CoalitionMask) -> Result<f64, ShapleyError> {
        if let Some(v) = self.seen.get(&coalition.0) {
            return Ok(*v);
        }
        let v = self.vf.evaluate(coalition)?;
        if !v.is_finite() {
            return Err(ShapleyError::NonFiniteValue(coalition));
        }
        self.seen.insert(coalition.0, v);
        Ok(v)
    }

    fn distinct(&self) -> usize {
        self.seen.len()
    }
}

fn factorial(k: usize) -> u128 {
    (1..=k as u128).product()
}

/// Exact decomposition in the subtractive form: for every coalition
/// containing a group, weight the drop from removing it by
/// `(s−1)!(n−s)!/n!`.
pub fn exact_shapley_subtractive<V: ValueFunction + ?Sized>(
    vf: &mut V,
    partition: &GroupPartition,
) -> Result<ShapleyResult, ShapleyError> {
    let n = partition.len();
    let mut memo = Memo::new(vf);
    let grand = memo.value(partition.full_mask())?;
    let n_fact = factorial(n) as f64;
    let mut values = vec![0.0; n];
    for bits in 1u32..=(CoalitionMask::full(n).0) {
        let mask = CoalitionMask(bits);
        let s = mask.size();
        let weight = (factorial(s - 1) * factorial(n - s)) as f64 / n_fact;
        let with = memo.value(mask)?;
        for j in mask.indices() {
            let without = memo.value(mask.without(j))?;
            values[j] += weight * (with - without);
        }
    }
    let distinct = memo.distinct();
    Ok(ShapleyResult::new(partition.clone(), values, grand, Method::ExactSubtractive, Some(distinct)))
}

/// Exact decomposition in the additive form: for every coalition *not*
/// containing a group, weight the gain from adding it by `s!(n−s−1)!/n!`.
pub fn exact_shapley_additive<V: ValueFunction + ?Sized>(
    vf: &mut V,
    partition: &GroupPartition,
) -> Result<ShapleyResult, ShapleyError> {
    let n = partition.len();
    let mut memo = Memo::new(vf);
    let grand = memo.value(partition.full_mask())?;
    let n_fact = factorial(n) as f64;
    let mut values = vec![0.0; n];
    for j in 0..n {
        for bits in 0u32..=(CoalitionMask::full(n).0) {
            let mask = CoalitionMask(bits);
            if mask.contains(j) {
                continue;
            }
            let s = mask.size();
            let weight = (factorial(s) * factorial(n - s - 1)) as f64 / n_fact;
            let without = memo.value(mask)?;
            let with = memo.value(mask.with(j))?;
            values[j] += weight * (with - without);
        }
    }
    let distinct = memo.distinct();
    Ok(ShapleyResult::new(partition.clone(), values, grand, Method::ExactAdditive, Some(distinct)))
}

/// The definition itself: average each group's marginal contribution over
/// every arrival order. Factorial cost, capped at [`MAX_ORACLE_GROUPS`]
/// groups; exists to referee the faster routes.
pub fn permutation_oracle<V: ValueFunction + ?Sized>(
    vf: &mut V,
    partition: &GroupPartition,
) -> Result<ShapleyResult, ShapleyError> {
    use itertools::Itertools;
    let n = partition.len();
    if n > MAX_ORACLE_GROUPS {
        return Err(ShapleyError::GroupCountRange {
            groups: n,
            min: 1,
            max: MAX_ORACLE_GROUPS,
            method: "permutation oracle",
        });
    }
    let mut memo = Memo::new(vf);
    let grand = memo.value(partition.full_mask())?;
    let mut sums = vec![0.0; n];
    let mut orders = 0u64;
    for perm in (0..n).permutations(n) {
        let mut mask = CoalitionMask::EMPTY;
        for &j in &perm {
            let before = memo.value(mask)?;
            mask = mask.with(j);
            let after = memo.value(mask)?;
            sums[j] += after - before;
        }
        orders += 1;
    }
    let values = sums.iter().map(|s| s / orders as f64).collect();
    let distinct = memo.distinct();
    Ok(ShapleyResult::new(partition.clone(), values, grand, Method::Permutation, Some(distinct)))
}

/// Solves the constrained weighted least-squares characterization: minimize
/// `Σ_Ψ k(Ψ)·(g(Ψ) − Σ_{M∈Ψ} φ_M)²` over proper coalitions subject to
/// `Σ φ = g(Π)`, with kernel `k = 1/C(n−2, s−1)`. The minimizer *is* the
/// Shapley value, computed here from the normal equations
/// `φ = A⁻¹(b − 𝟙·(𝟙ᵀA⁻¹b − g(Π))/(𝟙ᵀA⁻¹𝟙))` with `A = DᵀKD`, `b = DᵀKg`.
pub fn cls_shapley<V: ValueFunction + ?Sized>(
    vf: &mut V,
    partition: &GroupPartition,
) -> Result<ShapleyResult, ShapleyError> {
    let n = partition.len();
    if n < 2 || n > MAX_GROUPS {
        return Err(ShapleyError::GroupCountRange {
            groups: n,
            min: 2,
            max: MAX_GROUPS,
            method: "constrained least squares",
        });
    }
    let mut memo = Memo::new(vf);
    let grand = memo.value(partition.full_mask())?;
    let coalitions = enumerate_proper_coalitions(n)?;
    let rows = coalitions.len();
    let mut design = DMatrix::zeros(rows, n);
    let mut weights = DVector::zeros(rows);
    let mut g = DVector::zeros(rows);
    for (r, mask) in coalitions.iter().enumerate() {
        for j in mask.indices() {
            design[(r, j)] = 1.0;
        }
        weights[r] = kernel_weight(n, mask.size())?;
        g[r] = memo.value(*mask)?;
    }
    let values = constrained_wls(&design, &weights, &g, grand)?;
    let distinct = memo.distinct();
    Ok(ShapleyResult::new(
        partition.clone(),
        values,
        grand,
        Method::ConstrainedLeastSquares,
        Some(distinct),
    ))
}

/// Normal-equations solve of `min Σ w_r (d_r'φ − g_r)²  s.t.  𝟙ᵀφ = grand`.
/// Requires `DᵀWD` nonsingular, which the kernel weights guarantee.
fn constrained_wls(
    design: &DMatrix<f64>,
    weights: &DVector<f64>,
    g: &DVector<f64>,
    grand: f64,
) -> Result<Vec<f64>, ShapleyError> {
    let (rows, n) = design.shape();
    let weighted = DMatrix::from_fn(rows, n, |r, c| weights[r] * design[(r, c)]);
    let a = design.transpose() * &weighted;
    let b = design.transpose() * DVector::from_fn(rows, |r, _| weights[r] * g[r]);
    let mut rhs = DMatrix::zeros(n, 2);
    rhs.set_column(0, &b);
    rhs.set_column(1, &DVector::from_element(n, 1.0));
    let sol = solve_linear_systems(&a, &rhs)?;
    let unconstrained = sol.column(0);
    let correction = sol.column(1);
    let lift = (unconstrained.sum() - grand) / correction.sum();
    Ok((0..n).map(|j| unconstrained[j] - lift * correction[j]).collect())
}

/// The utilities-to-values map implied by the least-squares form:
/// `φ = L·g + m·g(Π)` over proper coalitions in canonical order. Columns of
/// `L` sum to zero and `m` sums to one, so efficiency holds for any inputs.
#[derive(Debug, Clone)]
pub struct AffineShapleyMap {
    partition: GroupPartition,
    coalitions: Vec<CoalitionMask>,
    linear: DMatrix<f64>,
    grand_coef: DVector<f64>,
}

impl AffineShapleyMap {
    pub fn partition(&self) -> &GroupPartition {
        &self.partition
    }

    /// Proper coalitions in the column order of [`Self::linear`].
    pub fn coalitions(&self) -> &[CoalitionMask] {
        &self.coalitions
    }

    /// `n × (2^n − 2)` coefficient matrix applied to the utility vector.
    pub fn linear(&self) -> &DMatrix<f64> {
        &self.linear
    }

    /// Coefficients applied to the grand value.
    pub fn grand_coef(&self) -> &DVector<f64> {
        &self.grand_coef
    }

    /// Applies the map to a complete table over the same partition.
    pub fn apply(&self, table: &UtilityTable) -> Result<ShapleyResult, ShapleyError> {
        if table.partition().labels() != self.partition.labels() {
            return Err(ShapleyError::PartitionMismatch);
        }
        let g = table.g_vector()?;
        let phi = &self.linear * g + table.grand() * &self.grand_coef;
        Ok(ShapleyResult::new(
            self.partition.clone(),
            phi.iter().copied().collect(),
            table.grand(),
            Method::ConstrainedLeastSquares,
            None,
        ))
    }
}

/// Materializes the affine map for a partition. The matrix has `2^n − 2`
/// columns, so the partition is capped at [`MAX_AFFINE_GROUPS`] groups;
/// beyond that, decompose each table directly instead.
pub fn affine_shapley_map(partition: &GroupPartition) -> Result<AffineShapleyMap, ShapleyError> {
    let n = partition.len();
    if n < 2 || n > MAX_AFFINE_GROUPS {
        return Err(ShapleyError::GroupCountRange {
            groups: n,
            min: 2,
            max: MAX_AFFINE_GROUPS,
            method: "affine map",
        });
    }
    let coalitions = enumerate_proper_coalitions(n)?;
    let rows = coalitions.len();
    let mut design = DMatrix::zeros(rows, n);
    let mut weights = DVector::zeros(rows);
    for (r, mask) in coalitions.iter().enumerate() {
        for j in mask.indices() {
            design[(r, j)] = 1.0;
        }
        weights[r] = kernel_weight(n, mask.size())?;
    }
    // A = DᵀKD; C = A⁻¹DᵀK and y = A⁻¹𝟙 in one multi-RHS solve, then fold in
    // the efficiency constraint: L = C − y·(𝟙ᵀC)/s, m = y/s with s = 𝟙ᵀy.
    let weighted_t = DMatrix::from_fn(n, rows, |c, r| weights[r] * design[(r, c)]);
    let a = &weighted_t * &design;
    let mut rhs = DMatrix::zeros(n, rows + 1);
    for r in 0..rows {
        rhs.set_column(r, &weighted_t.column(r));
    }
    rhs.set_column(rows, &DVector::from_element(n, 1.0));
    let sol = solve_linear_systems(&a, &rhs)?;
    let c = sol.columns(0, rows).into_owned();
    let y = sol.column(rows).into_owned();
    let s: f64 = y.sum();
    let col_sums = DVector::from_fn(rows, |r, _| c.column(r).sum());
    let mut linear = c;
    for r in 0..rows {
        let adjust = col_sums[r] / s;
        for j in 0..n {
            linear[(j, r)] -= adjust * y[j];
        }
    }
    let grand_coef = y / s;
    Ok(AffineShapleyMap { partition: partition.clone(), coalitions, linear, grand_coef })
}

/// Budget and seed for [`sampled_shapley`].
#[derive(Debug, Clone, Copy)]
pub struct SampleConfig {
    /// Number of coalition draws (with replacement); duplicates collapse
    /// into frequency weights, so distinct evaluations can be far fewer.
    pub q: usize,
    pub seed: u64,
    /// Evaluate every proper coalition with exact kernel weights instead of
    /// sampling; requires `q ≥ 2^n − 2` as an explicit acknowledgement.
    pub exhaustive: bool,
}

impl SampleConfig {
    pub fn new(q: usize, seed: u64) -> SampleConfig {
        SampleConfig { q, seed, exhaustive: false }
    }

    pub fn with_exhaustive(mut self, exhaustive: bool) -> SampleConfig {
        self.exhaustive = exhaustive;
        self
    }
}

/// Estimates the decomposition from sampled coalitions. Coalition sizes are
/// drawn with probability proportional to `C(n,s)·k(n,s)` and membership
/// uniformly at a given size, which reproduces the kernel weighting in
/// expectation; the sampled coalitions then enter the same constrained
/// least-squares problem with frequency weights. Deterministic for a fixed
/// seed.
pub fn sampled_shapley<V: ValueFunction + ?Sized>(
    vf: &mut V,
    partition: &GroupPartition,
    config: &SampleConfig,
) -> Result<ShapleyResult, ShapleyError> {
    let n = partition.len();
    if n < 2 || n > MAX_GROUPS {
        return Err(ShapleyError::GroupCountRange {
            groups: n,
            min: 2,
            max: MAX_GROUPS,
            method: "sampled estimator",
        });
    }
    if config.q < n {
        return Err(ShapleyError::SampleBudget { q: config.q, minimum: n });
    }
    let total_proper = (1usize << n) - 2;

    let mut memo = Memo::new(vf);
    let empty = memo.value(CoalitionMask::EMPTY)?;
    let grand = memo.value(partition.full_mask())?;
    if empty.abs() > 1e-9 * (1.0 + grand.abs()) {
        return Err(ShapleyError::EmptyValueNotZero(empty));
    }

    let (coalitions, weights) = if config.exhaustive {
        if config.q < total_proper {
            return Err(ShapleyError::SampleBudget { q: config.q, minimum: total_proper });
        }
        let masks = enumerate_proper_coalitions(n)?;
        let w: Vec<f64> =
            masks.iter().map(|m| kernel_weight(n, m.size())).collect::<Result<_, _>>()?;
        (masks, w)
    } else {
        let size_weights: Vec<f64> = (1..n)
            .map(|s| {
                Ok(num_integer::binomial(n as u128, s as u128) as f64 * kernel_weight(n, s)?)
            })
            .collect::<Result<_, CoalitionError>>()?;
        let size_dist = WeightedIndex::new(&size_weights)
            .expect("size weights are positive and finite");
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut counts: HashMap<u32, u64> = HashMap::new();
        for _ in 0..config.q {
            let s = size_dist.sample(&mut rng) + 1;
            let picked = rand::seq::index::sample(&mut rng, n, s);
            let mask = CoalitionMask::from_indices(picked.iter());
            *counts.entry(mask.0).or_insert(0) += 1;
        }
        let mut masks: Vec<CoalitionMask> = counts.keys().map(|m| CoalitionMask(*m)).collect();
        masks.sort_by_key(|m| (m.size(), m.0));
        let w: Vec<f64> = masks.iter().map(|m| counts[&m.0] as f64).collect();
        (masks, w)
    };

    let rows = coalitions.len();
    let mut g = DVector::zeros(rows);
    for (r, mask) in coalitions.iter().enumerate() {
        g[r] = memo.value(*mask)?;
    }

    // A sample can leave `DᵀWD` singular (a group never drawn), so instead
    // of the normal equations: write φ = (grand/n)𝟙 + Z·u with Z an
    // orthonormal basis of the efficiency constraint's null space and take
    // the basic least-squares solution in u.
    let ones = DMatrix::from_element(n, 1, 1.0);
    let z = PivotedQr::factor(&ones).null_basis();
    let mut reduced = DMatrix::zeros(rows, n - 1);
    let mut target = DVector::zeros(rows);
    for (r, mask) in coalitions.iter().enumerate() {
        let sw = weights[r].sqrt();
        for col in 0..n - 1 {
            let mut acc = 0.0;
            for j in mask.indices() {
                acc += z[(j, col)];
            }
            reduced[(r, col)] = sw * acc;
        }
        target[r] = sw * (g[r] - mask.size() as f64 * grand / n as f64);
    }
    let u = PivotedQr::factor(&reduced).lstsq_basic(&target);
    let phi = DVector::from_element(n, grand / n as f64) + z * u;
    let distinct = memo.distinct();
    Ok(ShapleyResult::new(
        partition.clone(),
        phi.iter().copied().collect(),
        grand,
        Method::Sampled,
        Some(distinct),
    ))
}

/// Builds the interventional value function used to explain a single
/// prediction: moving a coalition of feature groups replaces those features
/// of each background row with the explained point's values, and the utility
/// is the mean prediction shift against the untouched background.
///
/// The partition must carry member lists naming features; `feature_names`
/// gives the column order of `background` rows and `x_star`.
pub fn marginal_value_function<F>(
    mut predictor: F,
    background: Vec<Vec<f64>>,
    x_star: Vec<f64>,
    feature_names: Vec<String>,
    partition: &GroupPartition,
) -> Result<impl ValueFunction, ShapleyError>
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = feature_names.len();
    if x_star.len() != dim {
        return Err(ShapleyError::FeatureDimension { expected: dim, got: x_star.len() });
    }
    if background.is_empty() {
        return Err(ShapleyError::EmptyBackground);
    }
    for row in &background {
        if row.len() != dim {
            return Err(ShapleyError::FeatureDimension { expected: dim, got: row.len() });
        }
    }
    let members = partition.members().ok_or(ShapleyError::MembersRequired)?;
    let n = partition.len();
    let mut group_columns: Vec<Vec<usize>> = Vec::with_capacity(n);
    for group in members {
        let mut cols = Vec::with_capacity(group.len());
        for name in group {
            let col = feature_names
                .iter()
                .position(|f| f == name)
                .ok_or_else(|| ShapleyError::UnknownFeature(name.clone()))?;
            cols.push(col);
        }
        group_columns.push(cols);
    }
    let baseline =
        background.iter().map(|row| predictor(row)).sum::<f64>() / background.len() as f64;
    let mut buffer = vec![0.0; dim];
    Ok(move |coalition: CoalitionMask| -> Result<f64, ShapleyError> {
        if coalition.0 >> n != 0 {
            return Err(ShapleyError::Coalition(CoalitionError::MaskOutOfRange(coalition, n)));
        }
        let mut acc = 0.0;
        for row in &background {
            buffer.copy_from_slice(row);
            for j in coalition.indices() {
                for &col in &group_columns[j] {
                    buffer[col] = x_star[col];
                }
            }
            acc += predictor(&buffer);
        }
        Ok(acc / background.len() as f64 - baseline)
    })
}

/// The one-at-a-time decomposition the Shapley value replaces: each group
/// moved alone, everything else at benchmark. The effects need not sum to
/// the grand change; the shortfall is the interaction the ceteris paribus
/// reading silently drops.
#[derive(Debug, Clone)]
pub struct CeterisParibusResult {
    pub partition: GroupPartition,
    /// `g({j})` for each group.
    pub effects: Vec<f64>,
    pub grand: f64,
    /// `grand − Σ effects`.
    pub interaction_gap: f64,
}

impl CeterisParibusResult {
    /// Whether the one-at-a-time effects happen to account for the grand
    /// change within `tol · (1 + |grand|)` — true only when interactions
    /// vanish.
    pub fn efficiency_holds(&self, tol: f64) -> bool {
        self.interaction_gap.abs() <= tol * (1.0 + self.grand.abs())
    }
}

/// Evaluates every singleton coalition and reports the unexplained
/// interaction remainder.
pub fn ceteris_paribus_decomposition<V: ValueFunction + ?Sized>(
    vf: &mut V,
    partition: &GroupPartition,
) -> Result<CeterisParibusResult, ShapleyError> {
    let n = partition.len();
    let mut memo = Memo::new(vf);
    let grand = memo.value(partition.full_mask())?;
    let mut effects = Vec::with_capacity(n);
    for j in 0..n {
        effects.push(memo.value(CoalitionMask::singleton(j))?);
    }
    let interaction_gap = grand - effects.iter().sum::<f64>();
    Ok(CeterisParibusResult { partition: partition.clone(), effects, grand, interaction_gap })
}
