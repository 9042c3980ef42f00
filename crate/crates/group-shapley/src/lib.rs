//! Group Shapley decomposition of counterfactual model changes.
//!
//! When a structural model is re-simulated under a new parameter vector, the
//! change in any reported statistic can be attributed to *groups* of
//! parameters with a Shapley value defined over group coalitions: move the
//! groups in a coalition to their counterfactual values, keep the rest at the
//! benchmark, and average marginal contributions over coalitions. This crate
//! implements that decomposition end to end:
//!
//! - [`coalition`] — group partitions, coalition bitmasks, utility tables,
//!   and the weighted least-squares design behind the solver.
//! - [`numsolve`] — the small dense solvers everything runs on: a pivoted
//!   linear solve, a two-phase simplex with Bland's rule, and an active-set
//!   quadratic program.
//! - [`shapley`] — the decomposition itself: two exact enumeration forms, a
//!   permutation-average oracle, the constrained-least-squares solve, an
//!   affine map from utilities to values, a kernel-weighted sampling
//!   estimator, and adapters for prediction explainers.
//! - [`partial`] — inference when some coalition values were never simulated:
//!   per-group bounds and a minimum-norm selection under linear constraints.
//! - [`roy`] — a two-sector, two-period Roy model of sector choice, used as a
//!   fully worked counterfactual decomposition.
//! - [`cli`] — the JSON file formats and the subcommands behind the `gshap`
//!   binary.
//!
//! ## Running examples
//!
//! Each major capability has a runnable example, e.g.
//!
//! ```text
//! cargo run --release --example toy_decomposition
//! cargo run --release --example roy_counterfactual
//! cargo run --release --example partial_information
//! ```

pub mod cli;
pub mod coalition;
pub mod numsolve;
pub mod partial;
pub mod roy;
pub mod shapley;

pub use coalition::{
    build_design_system, enumerate_proper_coalitions, kernel_weight, CoalitionError, CoalitionMask,
    DesignSystem, GroupPartition, UtilityTable,
};
pub use numsolve::{
    solve_linear_system, solve_lp, solve_qp, LinearProgram, QuadraticProgram, Sense, SolveError,
    SolveStatus, Status,
};
pub use partial::{
    build_globalization_constraints, shapley_bound, shapley_minimum_norm, BoxMode, Constraint,
    ConstraintTerm, Direction, LinearConstraintSet, PartialError, PartialInferenceResult,
};
pub use roy::{
    expected_max_lognormal, inequality_measures, roy_counterfactual_value_function, simulate_panel,
    CovariateSpec, GroupSpec, InequalityMeasures, Panel, RoyError, RoyParams, RoyScenario,
    SimConfig,
};
pub use shapley::{
    affine_shapley_map, ceteris_paribus_decomposition, cls_shapley, evaluate_table,
    exact_shapley_additive, exact_shapley_subtractive, marginal_value_function, permutation_oracle,
    sampled_shapley, AffineShapleyMap, CeterisParibusResult, Method, SampleConfig, ShapleyError,
    ShapleyResult, ValueFunction,
};
