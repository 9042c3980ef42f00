//! File formats and subcommands behind the `gshap` binary.
//!
//! Everything here is plumbing: JSON readers and writers for utility tables
//! and constraint sets, text renderers for the importance and bounds tables,
//! and one function per subcommand. The decomposition work itself lives in
//! the library modules; the binary in `src/main.rs` only parses arguments
//! and forwards to [`run`].
//!
//! ## File formats
//!
//! A **utility file** serializes a [`UtilityTable`]:
//!
//! ```json
//! {
//!   "groups": ["cf", "ta", "tc"],
//!   "values": {
//!     "0": 2.0000000000000000e-2,
//!     "0,1": 3.8999999999999999e-1
//!   },
//!   "grand": 3.8999999999999999e-1
//! }
//! ```
//!
//! Keys are comma-joined ascending group indices; the empty coalition is
//! implicit (`g(∅) = 0`) and the grand coalition lives in `"grand"`. Proper
//! coalitions absent from `"values"` are missing, which is meaningful input
//! for `bounds`/`smns`. Writers emit keys in canonical coalition order (by
//! size, then index) and floats with 17 significant digits, so
//! write → read → write is byte-identical.
//!
//! A **constraint file** serializes a [`LinearConstraintSet`] as an array of
//! `Σ coef·g(coalition) ≤ rhs` rows:
//!
//! ```json
//! [
//!   {
//!     "terms": [
//!       { "coalition": "1,2", "coef": 1.0 },
//!       { "coalition": "0,1,2", "coef": -1.0 }
//!     ],
//!     "rhs": 0.0
//!   }
//! ]
//! ```
//!
//! ## Exit codes
//!
//! | code | meaning |
//! |---|---|
//! | 0 | success |
//! | 2 | utility table incomplete where completeness is required |
//! | 3 | constraints admit no completion |
//! | 64 | usage, schema, or input error |
//! | 70 | external value command failed |
//! | 1 | internal error |

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Stdio;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::coalition::{enumerate_proper_coalitions, CoalitionMask, GroupPartition, UtilityTable};
use crate::numsolve::{SolveStatus, Status};
use crate::partial::{
    shapley_minimum_norm, Constraint, ConstraintTerm, LinearConstraintSet, PartialError,
    PartialInferenceResult,
};
use crate::roy::{roy_counterfactual_value_function, RoyScenario, SimConfig};
use crate::shapley::{
    cls_shapley, evaluate_table, exact_shapley_subtractive, sampled_shapley, SampleConfig,
    ShapleyError, ShapleyResult, ValueFunction,
};

/// Everything a subcommand can fail with, each mapped to one exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {}", .path.display(), .source)]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {}", .path.display(), .message)]
    Schema { path: PathBuf, message: String },
    #[error(
        "utility table is incomplete (missing {}); use `bounds` or `smns` for partially observed tables",
        keys(.missing)
    )]
    Incomplete { missing: Vec<CoalitionMask> },
    #[error("the constraints admit no completion of the utility table")]
    Infeasible,
    #[error("{0}")]
    Usage(String),
    #[error("external value command failed on coalition key {coalition:?}: {message}")]
    External { coalition: String, message: String },
    #[error("internal error: {0}")]
    Internal(String),
}

fn keys(masks: &[CoalitionMask]) -> String {
    masks.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", ")
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Schema { .. } | CliError::Usage(_) => 64,
            CliError::Incomplete { .. } => 2,
            CliError::Infeasible => 3,
            CliError::External { .. } => 70,
            CliError::Internal(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "gshap",
    version,
    about = "Group Shapley decomposition of counterfactual model changes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Decompose a complete utility table into per-group contributions.
    Decompose {
        /// Utility table JSON file.
        #[arg(long)]
        utilities: PathBuf,
        /// Write the table to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format.
        #[arg(long, value_enum, default_value_t = TableFormat::Md)]
        format: TableFormat,
    },
    /// Per-group Shapley bounds and minimum-norm selection for a table with
    /// missing entries.
    Bounds {
        /// Utility table JSON file; unobserved coalitions may be omitted.
        #[arg(long)]
        utilities: PathBuf,
        /// Constraint JSON file restricting the missing entries.
        #[arg(long)]
        constraints: Option<PathBuf>,
        /// Write the table to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Only the minimum-norm decomposition, as a CSV importance table.
    Smns {
        /// Utility table JSON file; unobserved coalitions may be omitted.
        #[arg(long)]
        utilities: PathBuf,
        /// Constraint JSON file restricting the missing entries.
        #[arg(long)]
        constraints: Option<PathBuf>,
        /// Write the table to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the Roy-model counterfactual and decompose the change in
    /// wage inequality.
    Roy {
        /// Scenario JSON file: benchmark, counterfactual, parameter groups.
        #[arg(long)]
        scenario: PathBuf,
        /// Workers to simulate per coalition.
        #[arg(long, default_value_t = 1_000_000)]
        draws: usize,
        /// Seed shared by every coalition (common random numbers).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the evaluated utility table here, so `decompose` can
        /// replay it without re-simulating.
        #[arg(long)]
        emit_utilities: Option<PathBuf>,
    },
    /// Estimate the decomposition by sampling coalitions, with utilities
    /// supplied by an external command.
    ///
    /// The command is run through `sh -c` once per distinct coalition; it
    /// receives the coalition key on standard input (one line; the empty
    /// coalition is an empty line and must evaluate to 0) and prints one
    /// number.
    Sample {
        /// Number of groups; they are labelled g0, g1, ….
        #[arg(long)]
        groups: usize,
        /// Sampling budget (number of coalition draws).
        #[arg(long)]
        q: usize,
        /// Seed for the coalition sampler.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// External value command.
        #[arg(long)]
        value_cmd: String,
        /// Evaluate every coalition instead of sampling (requires q ≥ 2ⁿ−2).
        #[arg(long)]
        exhaustive: bool,
    },
}

/// Parses arguments and runs the chosen subcommand, returning the process
/// exit code. Errors are printed to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 64 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("gshap: {err}");
            err.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Decompose { utilities, out, format } => cmd_decompose(&utilities, out, format),
        Command::Bounds { utilities, constraints, out } => {
            cmd_bounds(&utilities, constraints.as_deref(), out)
        }
        Command::Smns { utilities, constraints, out } => {
            cmd_smns(&utilities, constraints.as_deref(), out)
        }
        Command::Roy { scenario, draws, seed, emit_utilities } => {
            cmd_roy(&scenario, draws, seed, emit_utilities)
        }
        Command::Sample { groups, q, seed, value_cmd, exhaustive } => {
            cmd_sample(groups, q, seed, &value_cmd, exhaustive)
        }
    }
}

// ---------------------------------------------------------------------------
// Utility files

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UtilityFileV1 {
    groups: Vec<String>,
    values: std::collections::BTreeMap<String, f64>,
    grand: f64,
}

/// Parses a utility file, validating labels, keys, and values.
pub fn parse_utility_table(text: &str) -> Result<UtilityTable, String> {
    let raw: UtilityFileV1 = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let partition = GroupPartition::from_labels(raw.groups).map_err(|e| e.to_string())?;
    let n = partition.len();
    let mut entries = Vec::with_capacity(raw.values.len());
    for (key, value) in raw.values {
        let mask = CoalitionMask::parse_key(&key).map_err(|e| e.to_string())?;
        if !mask.is_proper_nonempty(n) {
            return Err(format!(
                "coalition key {key:?} is not a proper non-empty coalition of {n} groups \
                 (the grand value belongs in \"grand\")"
            ));
        }
        entries.push((mask, value));
    }
    UtilityTable::new(partition, entries, raw.grand).map_err(|e| e.to_string())
}

/// Renders a utility file in canonical form: keys in coalition order,
/// floats with 17 significant digits.
pub fn render_utility_table(table: &UtilityTable) -> String {
    let mut out = String::from("{\n  \"groups\": [");
    for (j, label) in table.partition().labels().iter().enumerate() {
        if j > 0 {
            out.push_str(", ");
        }
        out.push_str(&json_string(label));
    }
    out.push_str("],\n");
    let observed = table.observed();
    if observed.is_empty() {
        out.push_str("  \"values\": {},\n");
    } else {
        out.push_str("  \"values\": {\n");
        for (j, (mask, value)) in observed.iter().enumerate() {
            let _ = write!(out, "    \"{}\": {}", mask.key(), fmt_float(*value));
            out.push_str(if j + 1 < observed.len() { ",\n" } else { "\n" });
        }
        out.push_str("  },\n");
    }
    let _ = writeln!(out, "  \"grand\": {}", fmt_float(table.grand()));
    out.push_str("}\n");
    out
}

pub fn read_utility_file(path: &Path) -> Result<UtilityTable, CliError> {
    parse_utility_table(&read_text(path)?).map_err(|message| CliError::Schema {
        path: path.to_path_buf(),
        message,
    })
}

pub fn write_utility_file(path: &Path, table: &UtilityTable) -> Result<(), CliError> {
    write_text(path, &render_utility_table(table))
}

// ---------------------------------------------------------------------------
// Constraint files

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintTermV1 {
    coalition: String,
    coef: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintRowV1 {
    terms: Vec<ConstraintTermV1>,
    rhs: f64,
}

/// Parses a constraint file against a partition of `n` groups. Terms may
/// reference any non-empty coalition up to the grand one (observed values
/// are substituted as constants at solve time).
pub fn parse_constraint_set(text: &str, n: usize) -> Result<LinearConstraintSet, String> {
    let raw: Vec<ConstraintRowV1> = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let mut constraints = Vec::with_capacity(raw.len());
    for row in raw {
        if !row.rhs.is_finite() {
            return Err(format!("right-hand side {} is not finite", row.rhs));
        }
        let mut terms = Vec::with_capacity(row.terms.len());
        for term in row.terms {
            let mask = CoalitionMask::parse_key(&term.coalition).map_err(|e| e.to_string())?;
            if mask.0 >> n != 0 {
                return Err(format!(
                    "coalition key {:?} is out of range for {n} groups",
                    term.coalition
                ));
            }
            if !term.coef.is_finite() {
                return Err(format!("coefficient {} on {:?} is not finite", term.coef, term.coalition));
            }
            terms.push(ConstraintTerm { coalition: mask, coef: term.coef });
        }
        constraints.push(Constraint { terms, rhs: row.rhs });
    }
    Ok(LinearConstraintSet::new(constraints))
}

/// Renders a constraint file in canonical form.
pub fn render_constraint_set(set: &LinearConstraintSet) -> String {
    if set.is_empty() {
        return String::from("[]\n");
    }
    let mut out = String::from("[\n");
    for (i, row) in set.constraints.iter().enumerate() {
        out.push_str("  {\n    \"terms\": [\n");
        for (j, term) in row.terms.iter().enumerate() {
            let _ = write!(
                out,
                "      {{ \"coalition\": \"{}\", \"coef\": {} }}",
                term.coalition.key(),
                fmt_float(term.coef)
            );
            out.push_str(if j + 1 < row.terms.len() { ",\n" } else { "\n" });
        }
        let _ = write!(out, "    ],\n    \"rhs\": {}\n  }}", fmt_float(row.rhs));
        out.push_str(if i + 1 < set.constraints.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}

pub fn read_constraint_file(path: &Path, n: usize) -> Result<LinearConstraintSet, CliError> {
    parse_constraint_set(&read_text(path)?, n).map_err(|message| CliError::Schema {
        path: path.to_path_buf(),
        message,
    })
}

pub fn write_constraint_file(path: &Path, set: &LinearConstraintSet) -> Result<(), CliError> {
    write_text(path, &render_constraint_set(set))
}

// ---------------------------------------------------------------------------
// Table renderers

/// Output format of the importance table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    /// 17-significant-digit CSV with `# grand` / `# method` trailers.
    Csv,
    /// Markdown table rounded for reading.
    Md,
}

/// Renders a decomposition as an importance table: one row per group with
/// its value and share of the grand change. Shares print as `NaN` when the
/// grand change is too small to share out.
pub fn render_importance_table(result: &ShapleyResult, format: TableFormat) -> String {
    let labels = result.partition.labels();
    let share = |j: usize| result.shares.as_ref().map_or(f64::NAN, |s| s[j]);
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push_str("group,value,share\n");
            for (j, label) in labels.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    csv_field(label),
                    fmt_float(result.values[j]),
                    fmt_float(share(j))
                );
            }
            let _ = writeln!(out, "# grand = {}", fmt_float(result.grand));
            let _ = writeln!(out, "# method = {}", result.method);
            if let Some(k) = result.distinct_evaluations {
                let _ = writeln!(out, "# distinct evaluations = {k}");
            }
        }
        TableFormat::Md => {
            out.push_str("| group | value | share |\n| --- | ---: | ---: |\n");
            for (j, label) in labels.iter().enumerate() {
                let _ = writeln!(out, "| {} | {:.4} | {:.3} |", label, result.values[j], share(j));
            }
            let _ = writeln!(out, "\ngrand = {:.4} (method: {})", result.grand, result.method);
            if let Some(k) = result.distinct_evaluations {
                let _ = writeln!(out, "distinct evaluations: {k}");
            }
        }
    }
    out
}

/// Renders the bounds table: groups as columns; lower-bound, upper-bound,
/// and minimum-norm rows. Cells read `unbounded` or `infeasible` when a
/// program has no finite optimum.
pub fn render_bounds_table(result: &PartialInferenceResult, grand: f64) -> String {
    let labels = result.partition.labels();
    let mut out = String::from("| bound |");
    for label in labels {
        let _ = write!(out, " {label} |");
    }
    out.push_str("\n| --- |");
    for _ in labels {
        out.push_str(" ---: |");
    }
    out.push('\n');
    let cell = |s: &SolveStatus| match s.status {
        Status::Optimal => format!("{:.4}", s.objective.expect("optimal solve carries an objective")),
        Status::Unbounded => String::from("unbounded"),
        Status::Infeasible => String::from("infeasible"),
    };
    for (name, row) in [("SLB", &result.lower), ("SUB", &result.upper)] {
        let _ = write!(out, "| {name} |");
        for s in row {
            let _ = write!(out, " {} |", cell(s));
        }
        out.push('\n');
    }
    out.push_str("| SMNS |");
    match &result.smns {
        Some(r) => {
            for v in &r.values {
                let _ = write!(out, " {v:.4} |");
            }
        }
        None => {
            for _ in labels {
                out.push_str(" infeasible |");
            }
        }
    }
    let _ = write!(out, "\n\ngrand = {grand:.4}\n");
    out
}

// ---------------------------------------------------------------------------
// Subcommands

/// Decomposes a complete table: constrained least squares for two or more
/// groups, direct enumeration for the trivial one-group table.
fn decompose_table(table: &UtilityTable) -> Result<ShapleyResult, CliError> {
    let partition = table.partition().clone();
    let mut vf = evaluate_table(table);
    let result = if partition.len() == 1 {
        exact_shapley_subtractive(&mut vf, &partition)
    } else {
        cls_shapley(&mut vf, &partition)
    };
    result.map_err(|e| CliError::Internal(e.to_string()))
}

fn cmd_decompose(
    utilities: &Path,
    out: Option<PathBuf>,
    format: TableFormat,
) -> Result<(), CliError> {
    let table = read_utility_file(utilities)?;
    if !table.is_complete() {
        return Err(CliError::Incomplete { missing: table.missing() });
    }
    let result = decompose_table(&table)?;
    emit(out.as_deref(), &render_importance_table(&result, format))
}

fn run_partial(
    utilities: &Path,
    constraints: Option<&Path>,
) -> Result<(PartialInferenceResult, f64), CliError> {
    let table = read_utility_file(utilities)?;
    let set = match constraints {
        Some(path) => read_constraint_file(path, table.partition().len())?,
        None => LinearConstraintSet::default(),
    };
    let result = shapley_minimum_norm(&table, &set).map_err(|e| match e {
        PartialError::CoalitionOutOfRange(_) | PartialError::NonFiniteConstraint => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Internal(other.to_string()),
    })?;
    Ok((result, table.grand()))
}

fn cmd_bounds(
    utilities: &Path,
    constraints: Option<&Path>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let (result, grand) = run_partial(utilities, constraints)?;
    emit(out.as_deref(), &render_bounds_table(&result, grand))?;
    if !result.feasible {
        return Err(CliError::Infeasible);
    }
    Ok(())
}

fn cmd_smns(
    utilities: &Path,
    constraints: Option<&Path>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let (result, _) = run_partial(utilities, constraints)?;
    match &result.smns {
        Some(smns) => emit(out.as_deref(), &render_importance_table(smns, TableFormat::Csv)),
        None => Err(CliError::Infeasible),
    }
}

fn cmd_roy(
    scenario_path: &Path,
    draws: usize,
    seed: u64,
    emit_utilities: Option<PathBuf>,
) -> Result<(), CliError> {
    if draws == 0 {
        return Err(CliError::Usage(String::from("--draws must be at least 1")));
    }
    let schema = |message: String| CliError::Schema {
        path: scenario_path.to_path_buf(),
        message,
    };
    let scenario: RoyScenario =
        serde_json::from_str(&read_text(scenario_path)?).map_err(|e| schema(e.to_string()))?;
    let config = SimConfig::new(draws, seed);
    let mut vf = roy_counterfactual_value_function(&scenario, &config)
        .map_err(|e| schema(e.to_string()))?;
    let partition = scenario.partition().map_err(|e| schema(e.to_string()))?;

    let n = partition.len();
    let internal = |e: ShapleyError| CliError::Internal(e.to_string());
    let mut entries = Vec::new();
    for mask in enumerate_proper_coalitions(n).map_err(|e| CliError::Internal(e.to_string()))? {
        entries.push((mask, vf.evaluate(mask).map_err(internal)?));
    }
    let grand = vf.evaluate(partition.full_mask()).map_err(internal)?;
    let table = UtilityTable::new(partition, entries, grand)
        .map_err(|e| CliError::Internal(e.to_string()))?;

    if let Some(path) = emit_utilities {
        write_utility_file(&path, &table)?;
    }
    let result = decompose_table(&table)?;
    emit(None, &render_importance_table(&result, TableFormat::Md))
}

/// Runs the external value command once: the coalition key goes to its
/// standard input, the utility comes back on its standard output.
struct CommandValueFunction {
    command: String,
}

impl ValueFunction for CommandValueFunction {
    fn evaluate(&mut self, coalition: CoalitionMask) -> Result<f64, ShapleyError> {
        let key = coalition.key();
        let fail = |message: String| ShapleyError::External { coalition: key.clone(), message };
        let mut child = std::process::Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| fail(e.to_string()))?;
        child
            .stdin
            .take()
            .expect("stdin was requested")
            .write_all(format!("{key}\n").as_bytes())
            .map_err(|e| fail(e.to_string()))?;
        let output = child.wait_with_output().map_err(|e| fail(e.to_string()))?;
        if !output.status.success() {
            return Err(fail(format!("command exited with {}", output.status)));
        }
        let text = String::from_utf8_lossy(&output.stdout);
        text.trim()
            .parse()
            .map_err(|_| fail(format!("expected one number on stdout, got {:?}", text.trim())))
    }
}

fn cmd_sample(
    groups: usize,
    q: usize,
    seed: u64,
    value_cmd: &str,
    exhaustive: bool,
) -> Result<(), CliError> {
    let labels: Vec<String> = (0..groups).map(|i| format!("g{i}")).collect();
    let partition = GroupPartition::from_labels(labels).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut vf = CommandValueFunction { command: value_cmd.to_string() };
    let config = SampleConfig::new(q, seed).with_exhaustive(exhaustive);
    let result = sampled_shapley(&mut vf, &partition, &config).map_err(|e| match e {
        ShapleyError::External { coalition, message } => CliError::External { coalition, message },
        ShapleyError::SampleBudget { .. } | ShapleyError::GroupCountRange { .. } => {
            CliError::Usage(e.to_string())
        }
        ShapleyError::NonFiniteValue(mask) => CliError::External {
            coalition: mask.key(),
            message: String::from("returned a non-finite utility"),
        },
        ShapleyError::EmptyValueNotZero(v) => CliError::External {
            coalition: String::new(),
            message: format!("must print 0 for the empty coalition, got {v}"),
        },
        other => CliError::Internal(other.to_string()),
    })?;
    emit(None, &render_importance_table(&result, TableFormat::Md))
}

// ---------------------------------------------------------------------------
// Small shared pieces

/// 17 significant digits: enough to reproduce any `f64` exactly on re-read.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_group_table() -> UtilityTable {
        let partition = GroupPartition::from_labels(["a", "b"]).unwrap();
        UtilityTable::complete(partition, &[1.0, 0.25], 2.0).unwrap()
    }

    /// A three-group table whose `{0,1}` pair was never evaluated.
    fn partial_table() -> UtilityTable {
        let partition = GroupPartition::from_labels(["a", "b", "c"]).unwrap();
        let entries = [
            (CoalitionMask::from_indices([0]), 1.0),
            (CoalitionMask::from_indices([1]), 2.0),
            (CoalitionMask::from_indices([2]), 3.0),
            (CoalitionMask::from_indices([0, 2]), 4.0),
            (CoalitionMask::from_indices([1, 2]), 5.0),
        ];
        UtilityTable::new(partition, entries, 6.0).unwrap()
    }

    /// Two rows pinning the one missing entry of [`partial_table`] to `v`:
    /// `g̃ ≤ v` and `−g̃ ≤ −v`.
    fn pin_missing(v: f64) -> LinearConstraintSet {
        let pair = CoalitionMask::from_indices([0, 1]);
        LinearConstraintSet::new(vec![
            Constraint { terms: vec![ConstraintTerm { coalition: pair, coef: 1.0 }], rhs: v },
            Constraint { terms: vec![ConstraintTerm { coalition: pair, coef: -1.0 }], rhs: -v },
        ])
    }

    #[test]
    fn utility_file_renders_canonically_and_round_trips() {
        let text = render_utility_table(&two_group_table());
        assert_eq!(
            text,
            "{\n  \"groups\": [\"a\", \"b\"],\n  \"values\": {\n    \"0\": 1.0000000000000000e0,\n    \"1\": 2.5000000000000000e-1\n  },\n  \"grand\": 2.0000000000000000e0\n}\n"
        );
        let back = parse_utility_table(&text).unwrap();
        assert_eq!(render_utility_table(&back), text);
        assert_eq!(back.value(CoalitionMask::from_indices([1])), Some(0.25));
    }

    #[test]
    fn utility_file_survives_awkward_floats() {
        let partition = GroupPartition::from_labels(["x", "y"]).unwrap();
        let table =
            UtilityTable::complete(partition, &[0.1 + 0.2, -1.0 / 3.0], f64::MAX).unwrap();
        let text = render_utility_table(&table);
        let back = parse_utility_table(&text).unwrap();
        assert_eq!(
            back.value(CoalitionMask::from_indices([0])).unwrap().to_bits(),
            (0.1f64 + 0.2).to_bits()
        );
        assert_eq!(back.grand().to_bits(), f64::MAX.to_bits());
        assert_eq!(render_utility_table(&back), text);
    }

    #[test]
    fn utility_file_rejects_schema_violations() {
        // No "grand".
        assert!(parse_utility_table(r#"{"groups": ["a"], "values": {}}"#).is_err());
        // Unknown field.
        assert!(
            parse_utility_table(r#"{"groups": ["a"], "values": {}, "grand": 0.0, "extra": 1}"#)
                .is_err()
        );
        // Keys must be ascending, non-empty, and proper.
        let head = r#"{"groups": ["a", "b"], "values": "#;
        for values in [
            r#"{"1,0": 1.0}"#,
            r#"{"": 1.0}"#,
            r#"{"0,1": 1.0}"#, // the grand coalition belongs in "grand"
            r#"{"2": 1.0}"#,
        ] {
            let text = format!("{head}{values}, \"grand\": 1.0}}");
            assert!(parse_utility_table(&text).is_err(), "accepted {values}");
        }
        // Duplicate labels.
        assert!(
            parse_utility_table(r#"{"groups": ["a", "a"], "values": {}, "grand": 0.0}"#).is_err()
        );
    }

    #[test]
    fn constraint_file_round_trips_and_validates() {
        let set = pin_missing(0.75);
        let text = render_constraint_set(&set);
        let back = parse_constraint_set(&text, 3).unwrap();
        assert_eq!(back, set);
        assert_eq!(render_constraint_set(&back), text);
        assert_eq!(render_constraint_set(&LinearConstraintSet::default()), "[]\n");

        // Keys out of range for the partition, and non-finite numbers.
        assert!(parse_constraint_set(&text, 1).is_err());
        let overflow = r#"[{"terms": [{"coalition": "0", "coef": 1.0}], "rhs": 1e999}]"#;
        assert!(parse_constraint_set(overflow, 2).is_err());
    }

    #[test]
    fn importance_table_csv_is_exact() {
        let result = decompose_table(&two_group_table()).unwrap();
        let text = render_importance_table(&result, TableFormat::Csv);
        // n = 2 closed form: φ = (g1 − g2 + gP)/2, (g2 − g1 + gP)/2.
        assert_eq!(
            text,
            "group,value,share\n\
             a,1.3750000000000000e0,6.8750000000000000e-1\n\
             b,6.2500000000000000e-1,3.1250000000000000e-1\n\
             # grand = 2.0000000000000000e0\n\
             # method = cls\n\
             # distinct evaluations = 3\n"
        );
    }

    #[test]
    fn importance_table_markdown_rounds_for_reading() {
        let result = decompose_table(&two_group_table()).unwrap();
        let text = render_importance_table(&result, TableFormat::Md);
        assert!(text.starts_with("| group | value | share |\n| --- | ---: | ---: |\n"));
        assert!(text.contains("| a | 1.3750 | 0.688 |"));
        assert!(text.contains("grand = 2.0000 (method: cls)"));
    }

    #[test]
    fn degenerate_shares_print_as_nan() {
        let partition = GroupPartition::from_labels(["a", "b"]).unwrap();
        let table = UtilityTable::complete(partition, &[1.0, -1.0], 0.0).unwrap();
        let result = decompose_table(&table).unwrap();
        let csv = render_importance_table(&result, TableFormat::Csv);
        assert!(csv.contains("a,1.0000000000000000e0,NaN"));
        let md = render_importance_table(&result, TableFormat::Md);
        assert!(md.contains("| a | 1.0000 | NaN |"));
    }

    #[test]
    fn bounds_table_marks_unbounded_and_infeasible_cells() {
        let table = partial_table();
        // Nothing restricts the missing pair: every bound runs away.
        let free = shapley_minimum_norm(&table, &LinearConstraintSet::default()).unwrap();
        let text = render_bounds_table(&free, table.grand());
        assert!(text.contains("| SLB | unbounded | unbounded | unbounded |"));
        assert!(text.contains("| SMNS |"));
        assert!(text.contains("grand = 6.0000"));

        // Contradictory rows: everything infeasible.
        let mut contradictory = pin_missing(1.0);
        contradictory.constraints.extend(pin_missing(2.0).constraints);
        let infeasible = shapley_minimum_norm(&table, &contradictory).unwrap();
        assert!(!infeasible.feasible);
        let text = render_bounds_table(&infeasible, table.grand());
        assert!(text.contains("| SLB | infeasible | infeasible | infeasible |"));
        assert!(text.contains("| SMNS | infeasible | infeasible | infeasible |"));

        // Pinned entry: bounds collapse onto the exact decomposition.
        let pinned = shapley_minimum_norm(&table, &pin_missing(2.5)).unwrap();
        let text = render_bounds_table(&pinned, table.grand());
        let smns = pinned.smns.as_ref().unwrap();
        for (j, v) in smns.values.iter().enumerate() {
            let lo = pinned.lower[j].objective.unwrap();
            let hi = pinned.upper[j].objective.unwrap();
            assert!((lo - v).abs() < 1e-8 && (hi - v).abs() < 1e-8);
        }
        assert!(text.contains("| SLB |") && !text.contains("unbounded"));
    }

    #[test]
    fn csv_fields_escape_delimiters() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(CliError::Incomplete { missing: vec![] }.exit_code(), 2);
        assert_eq!(CliError::Infeasible.exit_code(), 3);
        assert_eq!(CliError::Usage(String::new()).exit_code(), 64);
        assert_eq!(
            CliError::External { coalition: String::new(), message: String::new() }.exit_code(),
            70
        );
        assert_eq!(CliError::Internal(String::new()).exit_code(), 1);
    }
}
