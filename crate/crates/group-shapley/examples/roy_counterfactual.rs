//! End-to-end structural counterfactual: a two-sector Roy model of sector
//! choice, simulated under common random numbers and decomposed.
//!
//! The shipped `data/roy_scenario.json` moves three parameter groups from
//! benchmark to counterfactual values: the returns to sector-specific
//! skill (`beta1_1`, `beta2_1`), the sector-2 staying premium (`gamma2`),
//! and the sector-2 wage dispersion (`sigma2_sq`). The decomposed statistic
//! is the change in overall wage inequality — the 10–90 quantile spread —
//! from period 1 to period 2.
//!
//! Every coalition is simulated from the same seed, so the empty coalition
//! evaluates to exactly zero and coalition differences carry no
//! simulation-noise offset.
//!
//! ```text
//! cargo run --release --example roy_counterfactual [draws]
//! ```

use std::path::Path;

use group_shapley::roy::{
    inequality_measures, roy_counterfactual_value_function, simulate_panel, RoyScenario, SimConfig,
};
use group_shapley::{
    cls_shapley, enumerate_proper_coalitions, CoalitionMask, UtilityTable, ValueFunction,
};

fn main() {
    let draws: usize = std::env::args()
        .nth(1)
        .map(|a| a.parse().expect("draws must be a number"))
        .unwrap_or(1_000_000);
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/roy_scenario.json");
    let scenario: RoyScenario =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    scenario.validate().unwrap();
    let config = SimConfig::new(draws, 0);

    // What the benchmark economy looks like before any parameter moves.
    let panel = simulate_panel(&scenario.benchmark, &config).unwrap();
    let period1 = inequality_measures(&panel.wage1, Some(&panel.sector1), config.quantiles).unwrap();
    let period2 = inequality_measures(&panel.wage2, Some(&panel.sector2), config.quantiles).unwrap();
    println!("benchmark economy, {draws} workers:");
    println!(
        "  period 1: spread {:.2}, between-sector gap {:.2}",
        period1.overall,
        period1.between.unwrap()
    );
    println!(
        "  period 2: spread {:.2}, between-sector gap {:.2}",
        period2.overall,
        period2.between.unwrap()
    );

    let partition = scenario.partition().unwrap();
    let mut vf = roy_counterfactual_value_function(&scenario, &config).unwrap();
    println!("\ncoalition utilities (common random numbers):");
    println!("  g(∅)     = {} (exactly; same draws, same parameters)", vf.evaluate(CoalitionMask::EMPTY).unwrap());
    let mut entries = Vec::new();
    for mask in enumerate_proper_coalitions(partition.len()).unwrap() {
        let value = vf.evaluate(mask).unwrap();
        println!("  g({mask}) = {value:9.3}");
        entries.push((mask, value));
    }
    let grand = vf.evaluate(partition.full_mask()).unwrap();
    println!("  g(Π)     = {grand:9.3}");

    let table = UtilityTable::new(partition.clone(), entries, grand).unwrap();
    let mut tabled = group_shapley::evaluate_table(&table);
    let result = cls_shapley(&mut tabled, &partition).unwrap();
    println!("\nimportance table (values sum to the grand change):");
    for (label, (value, share)) in partition
        .labels()
        .iter()
        .zip(result.values.iter().zip(result.shares.as_ref().unwrap()))
    {
        println!("  {label:11} {value:8.1}   share {share:.2}");
    }
    println!("  {:11} {:8.1}", "total", result.grand);
}
