//! Inference when part of the utility table was never simulated.
//!
//! The shipped `data/cgt/` files reproduce a published trade-liberalization
//! exercise: three parameter groups — firing cost (`cf`), tariff (`tau_a`),
//! iceberg trade cost (`tau_c`) — whose counterfactual moved thirteen
//! aggregate statistics. The published experiments report the singletons,
//! the `{cf, tau_a}` reform pair, and the grand change, but not the two
//! pairs involving `tau_c`, so the Shapley value is not point-identified.
//!
//! Under sign restrictions on the missing pairs this example computes, per
//! aggregate, the attainable range of each group's value (SLB/SUB) and the
//! admissible decomposition closest to an equal split (SMNS). Some
//! aggregates' restrictions are mutually inconsistent; those come out
//! infeasible rather than forced.
//!
//! ```text
//! cargo run --release --example partial_information
//! ```

use std::path::Path;

use group_shapley::cli::{read_constraint_file, read_utility_file, render_bounds_table};
use group_shapley::partial::{build_globalization_constraints, shapley_minimum_norm, BoxMode};

const AGGREGATES: [&str; 13] = [
    "revenue-share-of-exports",
    "exit-rate",
    "job-turnover",
    "mass-of-firms",
    "labor-share-q-sector",
    "vacancy-filling-rate",
    "unemployment-rate-q-sector",
    "std-wages-firms",
    "std-wages-workers",
    "std-j-firms",
    "std-j-workers",
    "exchange-rate",
    "real-income",
];

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/cgt");
    for slug in AGGREGATES {
        let table = read_utility_file(&data.join(format!("{slug}.utilities.json"))).unwrap();
        let constraints =
            read_constraint_file(&data.join(format!("{slug}.constraints-sign.json")), 3).unwrap();
        let result = shapley_minimum_norm(&table, &constraints).unwrap();
        let missing: Vec<String> = table.missing().iter().map(|m| m.to_string()).collect();
        println!("== {slug} (missing {}) ==", missing.join(", "));
        print!("{}", render_bounds_table(&result, table.grand()));
        println!();
    }

    // The same sign rows can be built from the table instead of read from
    // disk, optionally with a [0.5, 1.5] plausibility band on the missing
    // pairs (the `constraints-sign-band` files). Read literally on the
    // re-centred changes (`BoxMode::Difference`), the band contradicts the
    // sign rows for every aggregate whose changes are small — only three of
    // the thirteen survive it.
    println!("== the [0.5, 1.5] band, read literally on the changes ==");
    for slug in AGGREGATES {
        let table = read_utility_file(&data.join(format!("{slug}.utilities.json"))).unwrap();
        let banded = build_globalization_constraints(&table, Some(BoxMode::Difference)).unwrap();
        let result = shapley_minimum_norm(&table, &banded).unwrap();
        println!(
            "  {slug:28} {}",
            if result.feasible { "feasible" } else { "infeasible" }
        );
    }
}
