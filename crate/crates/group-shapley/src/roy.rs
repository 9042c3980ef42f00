//! A two-sector, two-period Roy model of sector choice, used as the worked
//! structural counterfactual throughout the examples and tests.
//!
//! Each worker draws a skill covariate per sector and chooses where to work.
//! Log wages are `x_s'β_s + ε_st` with sector-specific error variance
//! `σ_s²`; a worker who stays in period 2 in the sector chosen in period 1
//! earns a premium `γ_s` on the log wage. Period-1 choice is
//! forward-looking: current wage plus the discounted closed-form expectation
//! of the best period-2 wage, conditional on where staying would pay the
//! premium. Period-2 choice is a simple wage comparison. Switching costs
//! are not modeled (the cost parameter must be zero).
//!
//! A counterfactual moves named parameters from a benchmark vector to a
//! counterfactual vector. [`RoyScenario`] names the parameter groups whose
//! joint movement is to be decomposed, and
//! [`roy_counterfactual_value_function`] exposes the whole machine as a
//! coalition value function: the utility of a coalition is the change in an
//! inequality statistic — by default the 10–90 spread of wages, period 2
//! minus period 1 — when exactly those groups move. All coalitions are
//! simulated under common random numbers from one seed, so the empty
//! coalition evaluates to exactly zero and differences between coalitions
//! are free of simulation-noise offsets.

use std::collections::HashSet;
use std::sync::LazyLock;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::coalition::{CoalitionError, CoalitionMask, GroupPartition};
use crate::shapley::{ShapleyError, ValueFunction};

#[derive(Debug, Error)]
pub enum RoyError {
    #[error(transparent)]
    Coalition(#[from] CoalitionError),
    #[error("parameter `{0}` is not finite")]
    NonFiniteParameter(&'static str),
    #[error("variance `{0}` must be strictly positive")]
    NonPositiveVariance(&'static str),
    #[error("switching costs are not modeled; `switching_cost` must be zero, got {0}")]
    SwitchingCostUnsupported(f64),
    #[error("discount factor must lie in [0, 1], got {0}")]
    DiscountOutOfRange(f64),
    #[error("simulation needs at least one draw")]
    NoDraws,
    #[error("quantile pair ({0}, {1}) must satisfy 0 < lo < hi < 1")]
    BadQuantiles(f64, f64),
    #[error("scenario group names unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("parameter `{0}` is grouped but identical in benchmark and counterfactual")]
    GroupedParameterFixed(String),
    #[error("parameter `{0}` differs between benchmark and counterfactual but belongs to no group")]
    UncoveredParameter(String),
    #[error("benchmark and counterfactual must share the same `{0}`; it is environment, not a treatment")]
    EnvironmentMismatch(&'static str),
    #[error("wage vector is empty")]
    EmptyWages,
    #[error("{wages} wages but {sectors} sector labels")]
    LengthMismatch { wages: usize, sectors: usize },
    #[error("sector label {0} is neither 1 nor 2")]
    BadSectorLabel(u8),
}

/// The parameter names a [`RoyScenario`] group may reference.
pub const PARAMETER_NAMES: [&str; 8] = [
    "beta1_0", "beta1_1", "beta2_0", "beta2_1", "gamma1", "gamma2", "sigma1_sq", "sigma2_sq",
];

/// One parameter vector of the model. `beta{s}` are the log-wage
/// coefficients of sector `s` on `(1, z_s)`, `gamma{s}` the staying premium,
/// `sigma{s}_sq` the error variance. `switching_cost` must be zero and
/// `discount` is the weight on the period-2 continuation value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoyParams {
    pub beta1: [f64; 2],
    pub beta2: [f64; 2],
    pub gamma1: f64,
    pub gamma2: f64,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    #[serde(default)]
    pub switching_cost: f64,
    pub discount: f64,
}

impl RoyParams {
    pub fn validate(&self) -> Result<(), RoyError> {
        for (name, value) in [
            ("beta1", self.beta1[0]),
            ("beta1", self.beta1[1]),
            ("beta2", self.beta2[0]),
            ("beta2", self.beta2[1]),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("sigma1_sq", self.sigma1_sq),
            ("sigma2_sq", self.sigma2_sq),
            ("switching_cost", self.switching_cost),
            ("discount", self.discount),
        ] {
            if !value.is_finite() {
                return Err(RoyError::NonFiniteParameter(name));
            }
        }
        if self.sigma1_sq <= 0.0 {
            return Err(RoyError::NonPositiveVariance("sigma1_sq"));
        }
        if self.sigma2_sq <= 0.0 {
            return Err(RoyError::NonPositiveVariance("sigma2_sq"));
        }
        if self.switching_cost != 0.0 {
            return Err(RoyError::SwitchingCostUnsupported(self.switching_cost));
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return Err(RoyError::DiscountOutOfRange(self.discount));
        }
        Ok(())
    }

    /// Looks a parameter up by its [`PARAMETER_NAMES`] entry.
    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "beta1_0" => self.beta1[0],
            "beta1_1" => self.beta1[1],
            "beta2_0" => self.beta2[0],
            "beta2_1" => self.beta2[1],
            "gamma1" => self.gamma1,
            "gamma2" => self.gamma2,
            "sigma1_sq" => self.sigma1_sq,
            "sigma2_sq" => self.sigma2_sq,
            _ => return None,
        })
    }

    fn set(&mut self, name: &str, value: f64) -> bool {
        match name {
            "beta1_0" => self.beta1[0] = value,
            "beta1_1" => self.beta1[1] = value,
            "beta2_0" => self.beta2[0] = value,
            "beta2_1" => self.beta2[1] = value,
            "gamma1" => self.gamma1 = value,
            "gamma2" => self.gamma2 = value,
            "sigma1_sq" => self.sigma1_sq = value,
            "sigma2_sq" => self.sigma2_sq = value,
            _ => return false,
        }
        true
    }
}

/// How worker covariates are drawn. A single design is supported: one
/// independent standard-normal skill draw per sector per worker entering the
/// log wage through `β_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovariateSpec {
    IidStandardNormal,
}

/// Simulation settings: panel size, seed, covariate design, and the
/// quantile pair for the inequality spread.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n_draws: usize,
    pub seed: u64,
    pub covariates: CovariateSpec,
    pub quantiles: (f64, f64),
}

impl SimConfig {
    pub fn new(n_draws: usize, seed: u64) -> SimConfig {
        SimConfig {
            n_draws,
            seed,
            covariates: CovariateSpec::IidStandardNormal,
            quantiles: (0.1, 0.9),
        }
    }

    pub fn validate(&self) -> Result<(), RoyError> {
        if self.n_draws == 0 {
            return Err(RoyError::NoDraws);
        }
        validate_quantiles(self.quantiles)?;
        Ok(())
    }
}

fn validate_quantiles((lo, hi): (f64, f64)) -> Result<(), RoyError> {
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi && hi < 1.0) {
        return Err(RoyError::BadQuantiles(lo, hi));
    }
    Ok(())
}

/// A simulated worker panel: realized wages and chosen sectors (1 or 2) for
/// both periods, in worker order.
#[derive(Debug, Clone)]
pub struct Panel {
    pub wage1: Vec<f64>,
    pub wage2: Vec<f64>,
    pub sector1: Vec<u8>,
    pub sector2: Vec<u8>,
}

impl Panel {
    pub fn len(&self) -> usize {
        self.wage1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wage1.is_empty()
    }
}

static STD_NORMAL: LazyLock<Normal> =
    LazyLock::new(|| Normal::new(0.0, 1.0).expect("standard normal is well-formed"));

/// Closed-form `E[max(W₁, W₂)]` for independent lognormals with log-means
/// `m_s` and log-variances `v_s ≥ 0`:
///
/// `e^{m₁+v₁/2}·Φ((m₁−m₂+v₁)/s) + e^{m₂+v₂/2}·Φ((m₂−m₁+v₂)/s)`,
/// `s = √(v₁+v₂)`.
///
/// Degenerates to `max(e^{m₁}, e^{m₂})` when both variances vanish.
pub fn expected_max_lognormal(m1: f64, v1: f64, m2: f64, v2: f64) -> f64 {
    let s = (v1 + v2).sqrt();
    if s == 0.0 {
        return m1.max(m2).exp();
    }
    (m1 + v1 / 2.0).exp() * STD_NORMAL.cdf((m1 - m2 + v1) / s)
        + (m2 + v2 / 2.0).exp() * STD_NORMAL.cdf((m2 - m1 + v2) / s)
}

/// What one worker does, given parameters and six standard-normal draws in
/// the order `z₁, z₂, ε₁₁, ε₂₁, ε₁₂, ε₂₂`.
pub(crate) struct WorkerOutcome {
    pub wage1: f64,
    pub wage2: f64,
    pub sector1: u8,
    pub sector2: u8,
}

pub(crate) fn worker_outcome(params: &RoyParams, draws: &[f64; 6]) -> WorkerOutcome {
    let [z1, z2, e11, e21, e12, e22] = *draws;
    let mu1 = params.beta1[0] + params.beta1[1] * z1;
    let mu2 = params.beta2[0] + params.beta2[1] * z2;
    let sd1 = params.sigma1_sq.sqrt();
    let sd2 = params.sigma2_sq.sqrt();

    let lw11 = mu1 + sd1 * e11;
    let lw21 = mu2 + sd2 * e21;
    // Staying in sector s adds γ_s to that sector's period-2 log mean.
    let continuation_if_1 = expected_max_lognormal(
        mu1 + params.gamma1,
        params.sigma1_sq,
        mu2,
        params.sigma2_sq,
    );
    let continuation_if_2 = expected_max_lognormal(
        mu1,
        params.sigma1_sq,
        mu2 + params.gamma2,
        params.sigma2_sq,
    );
    let value_1 = lw11.exp() + params.discount * continuation_if_1;
    let value_2 = lw21.exp() + params.discount * continuation_if_2;
    let stays_1 = value_1 > value_2;
    let (sector1, wage1) = if stays_1 { (1, lw11.exp()) } else { (2, lw21.exp()) };

    let lw12 = mu1 + if stays_1 { params.gamma1 } else { 0.0 } + sd1 * e12;
    let lw22 = mu2 + if stays_1 { 0.0 } else { params.gamma2 } + sd2 * e22;
    let (sector2, wage2) =
        if lw12 > lw22 { (1, lw12.exp()) } else { (2, lw22.exp()) };
    WorkerOutcome { wage1, wage2, sector1, sector2 }
}

/// Workers per random-number stream; parallel blocks reproduce the same
/// panel regardless of thread scheduling.
const STREAM_BLOCK: usize = 1 << 16;

/// Simulates the panel. Deterministic in `(params, config)`: worker `i`
/// always consumes the same six draws from the stream of its block.
pub fn simulate_panel(params: &RoyParams, config: &SimConfig) -> Result<Panel, RoyError> {
    params.validate()?;
    config.validate()?;
    let CovariateSpec::IidStandardNormal = config.covariates;

    let n = config.n_draws;
    let blocks = n.div_ceil(STREAM_BLOCK);
    let parts: Vec<(Vec<f64>, Vec<f64>, Vec<u8>, Vec<u8>)> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(block as u64);
            let count = STREAM_BLOCK.min(n - block * STREAM_BLOCK);
            let mut wage1 = Vec::with_capacity(count);
            let mut wage2 = Vec::with_capacity(count);
            let mut sector1 = Vec::with_capacity(count);
            let mut sector2 = Vec::with_capacity(count);
            for _ in 0..count {
                let mut draws = [0.0f64; 6];
                for d in draws.iter_mut() {
                    *d = rng.sample(StandardNormal);
                }
                let out = worker_outcome(params, &draws);
                wage1.push(out.wage1);
                wage2.push(out.wage2);
                sector1.push(out.sector1);
                sector2.push(out.sector2);
            }
            (wage1, wage2, sector1, sector2)
        })
        .collect();

    let mut panel = Panel {
        wage1: Vec::with_capacity(n),
        wage2: Vec::with_capacity(n),
        sector1: Vec::with_capacity(n),
        sector2: Vec::with_capacity(n),
    };
    for (w1, w2, s1, s2) in parts {
        panel.wage1.extend(w1);
        panel.wage2.extend(w2);
        panel.sector1.extend(s1);
        panel.sector2.extend(s2);
    }
    Ok(panel)
}

/// Quantile spreads of a wage distribution. Quantiles are order statistics:
/// `Q_τ` is the `⌈τn⌉`-th smallest wage.
#[derive(Debug, Clone)]
pub struct InequalityMeasures {
    /// `Q_hi − Q_lo` over all wages.
    pub overall: f64,
    /// Mean wage in sector 1 minus sector 2, when labels are supplied and
    /// both sectors are populated.
    pub between: Option<f64>,
    /// The same spread within sector 1 and sector 2; `None` for an empty
    /// sector.
    pub within: [Option<f64>; 2],
}

fn order_statistic(scratch: &mut [f64], tau: f64) -> f64 {
    let n = scratch.len();
    let k = ((tau * n as f64).ceil() as usize).clamp(1, n) - 1;
    let (_, value, _) = scratch.select_nth_unstable_by(k, |a, b| a.total_cmp(b));
    *value
}

fn quantile_spread(wages: &[f64], (lo, hi): (f64, f64)) -> f64 {
    let mut scratch = wages.to_vec();
    let high = order_statistic(&mut scratch, hi);
    let low = order_statistic(&mut scratch, lo);
    high - low
}

/// Computes the overall spread and, when sector labels are given, the
/// between-sector mean gap and within-sector spreads.
pub fn inequality_measures(
    wages: &[f64],
    sectors: Option<&[u8]>,
    quantiles: (f64, f64),
) -> Result<InequalityMeasures, RoyError> {
    if wages.is_empty() {
        return Err(RoyError::EmptyWages);
    }
    validate_quantiles(quantiles)?;
    let overall = quantile_spread(wages, quantiles);
    let (between, within) = match sectors {
        None => (None, [None, None]),
        Some(labels) => {
            if labels.len() != wages.len() {
                return Err(RoyError::LengthMismatch {
                    wages: wages.len(),
                    sectors: labels.len(),
                });
            }
            let mut split: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
            for (w, s) in wages.iter().zip(labels.iter()) {
                match s {
                    1 => split[0].push(*w),
                    2 => split[1].push(*w),
                    other => return Err(RoyError::BadSectorLabel(*other)),
                }
            }
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let between = (!split[0].is_empty() && !split[1].is_empty())
                .then(|| mean(&split[0]) - mean(&split[1]));
            let within = [
                (!split[0].is_empty()).then(|| quantile_spread(&split[0], quantiles)),
                (!split[1].is_empty()).then(|| quantile_spread(&split[1], quantiles)),
            ];
            (between, within)
        }
    };
    Ok(InequalityMeasures { overall, between, within })
}

/// The statistic decomposed by the counterfactual exercise: period-2 spread
/// minus period-1 spread, on wage levels.
fn spread_change(panel: &Panel, quantiles: (f64, f64)) -> Result<f64, RoyError> {
    let second = inequality_measures(&panel.wage2, None, quantiles)?;
    let first = inequality_measures(&panel.wage1, None, quantiles)?;
    Ok(second.overall - first.overall)
}

/// One named group of parameters moved jointly in the decomposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub label: String,
    pub params: Vec<String>,
}

/// A complete counterfactual exercise: where the parameters start, where
/// they end, and which named groups move together. `quantiles` optionally
/// overrides the simulation default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoyScenario {
    pub benchmark: RoyParams,
    pub counterfactual: RoyParams,
    pub groups: Vec<GroupSpec>,
    #[serde(default)]
    pub quantiles: Option<(f64, f64)>,
}

impl RoyScenario {
    /// The group partition of the decomposition, carrying parameter names as
    /// members.
    pub fn partition(&self) -> Result<GroupPartition, RoyError> {
        Ok(GroupPartition::with_members(
            self.groups
                .iter()
                .map(|g| (g.label.clone(), g.params.clone()))
                .collect(),
        )?)
    }

    /// Full validation: both parameter vectors well-formed, environment
    /// parameters identical, every grouped parameter known and actually
    /// moving, every moving parameter covered by some group.
    pub fn validate(&self) -> Result<(), RoyError> {
        self.benchmark.validate()?;
        self.counterfactual.validate()?;
        if self.benchmark.discount != self.counterfactual.discount {
            return Err(RoyError::EnvironmentMismatch("discount"));
        }
        if self.benchmark.switching_cost != self.counterfactual.switching_cost {
            return Err(RoyError::EnvironmentMismatch("switching_cost"));
        }
        self.partition()?; // label and membership hygiene
        let mut grouped: HashSet<&str> = HashSet::new();
        for group in &self.groups {
            for name in &group.params {
                let (bench, cf) = match (
                    self.benchmark.get(name),
                    self.counterfactual.get(name),
                ) {
                    (Some(b), Some(c)) => (b, c),
                    _ => return Err(RoyError::UnknownParameter(name.clone())),
                };
                if bench == cf {
                    return Err(RoyError::GroupedParameterFixed(name.clone()));
                }
                grouped.insert(name.as_str());
            }
        }
        for name in PARAMETER_NAMES {
            let differs = self.benchmark.get(name) != self.counterfactual.get(name);
            if differs && !grouped.contains(name) {
                return Err(RoyError::UncoveredParameter(name.to_string()));
            }
        }
        if let Some(q) = self.quantiles {
            validate_quantiles(q)?;
        }
        Ok(())
    }

    /// The parameter vector with the coalition's groups at their
    /// counterfactual values and everything else at benchmark.
    pub fn blended(&self, coalition: CoalitionMask) -> RoyParams {
        let mut params = self.benchmark.clone();
        for idx in coalition.indices() {
            for name in &self.groups[idx].params {
                let value = self
                    .counterfactual
                    .get(name)
                    .expect("validated scenario names only known parameters");
                params.set(name, value);
            }
        }
        params
    }
}

/// Builds the coalition value function of the counterfactual exercise:
/// `g(Ψ)` simulates the panel with the groups in `Ψ` at counterfactual
/// values and reports the change in the spread statistic against the
/// benchmark panel. All evaluations share the seed (common random numbers),
/// so `g(∅)` is exactly zero; the benchmark statistic is computed once and
/// cached.
pub fn roy_counterfactual_value_function(
    scenario: &RoyScenario,
    config: &SimConfig,
) -> Result<impl ValueFunction, RoyError> {
    scenario.validate()?;
    config.validate()?;
    let scenario = scenario.clone();
    let config = config.clone();
    let quantiles = scenario.quantiles.unwrap_or(config.quantiles);
    let n_groups = scenario.groups.len();
    let mut baseline: Option<f64> = None;
    Ok(move |coalition: CoalitionMask| -> Result<f64, ShapleyError> {
        if coalition.0 >> n_groups != 0 {
            return Err(ShapleyError::Coalition(CoalitionError::MaskOutOfRange(
                coalition, n_groups,
            )));
        }
        let external = |e: RoyError| ShapleyError::External {
            coalition: coalition.key(),
            message: e.to_string(),
        };
        let base = match baseline {
            Some(b) => b,
            None => {
                let panel = simulate_panel(&scenario.benchmark, &config).map_err(external)?;
                let b = spread_change(&panel, quantiles).map_err(external)?;
                baseline = Some(b);
                b
            }
        };
        let panel = simulate_panel(&scenario.blended(coalition), &config).map_err(external)?;
        Ok(spread_change(&panel, quantiles).map_err(external)? - base)
    })
}
