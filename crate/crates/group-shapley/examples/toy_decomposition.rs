//! The smallest complete decomposition: five parameters in three groups.
//!
//! A model has parameters θ1…θ5, partitioned as {θ1}, {θ2, θ3}, {θ4, θ5}.
//! All six proper coalition utilities were simulated and shipped in
//! `data/toy_utilities.json`, so the group Shapley value is computable four
//! independent ways; this example runs all of them, shows they agree, and
//! prints the importance table plus the affine utilities-to-values map.
//!
//! ```text
//! cargo run --release --example toy_decomposition
//! ```

use std::path::Path;

use group_shapley::cli::{read_utility_file, render_importance_table, TableFormat};
use group_shapley::{
    affine_shapley_map, cls_shapley, evaluate_table, exact_shapley_additive,
    exact_shapley_subtractive, kernel_weight, permutation_oracle,
};

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy_utilities.json");
    let table = read_utility_file(&path).expect("shipped toy table parses");
    let partition = table.partition().clone();
    println!("utility table ({} groups, grand = {}):", partition.len(), table.grand());
    for (mask, value) in table.observed() {
        println!("  g({mask}) = {value}");
    }

    // With three groups every proper coalition has the same least-squares
    // weight, so the weighted and unweighted solves coincide.
    println!("\nkernel weights:");
    for size in 1..partition.len() {
        println!("  k({}, {size}) = {}", partition.len(), kernel_weight(partition.len(), size).unwrap());
    }

    let mut vf = evaluate_table(&table);
    let subtractive = exact_shapley_subtractive(&mut vf, &partition).unwrap();
    let additive = exact_shapley_additive(&mut vf, &partition).unwrap();
    let permutation = permutation_oracle(&mut vf, &partition).unwrap();
    let cls = cls_shapley(&mut vf, &partition).unwrap();

    println!("\nfour routes to the same value:");
    for result in [&subtractive, &additive, &permutation, &cls] {
        let values: Vec<String> = result.values.iter().map(|v| format!("{v:.12}")).collect();
        println!("  {:18} [{}]", result.method.to_string(), values.join(", "));
    }
    let spread: f64 = subtractive
        .values
        .iter()
        .zip(&cls.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("  max |subtractive − cls| = {spread:.2e}");

    println!("\nimportance table:");
    print!("{}", render_importance_table(&cls, TableFormat::Md));

    // The whole solve is one affine map φ = L·g + m·g(Π); its structure
    // makes efficiency automatic (columns of L sum to 0, Σm = 1).
    let map = affine_shapley_map(&partition).unwrap();
    println!("affine map φ = L·g + m·g(Π):");
    for (j, label) in partition.labels().iter().enumerate() {
        let row: Vec<String> =
            (0..map.linear().ncols()).map(|c| format!("{:+.4}", map.linear()[(j, c)])).collect();
        println!("  φ[{label:7}] = [{}]·g {:+.4}·g(Π)", row.join(" "), map.grand_coef()[j]);
    }
    let from_map = map.apply(&table).unwrap();
    println!(
        "map reproduces the solve: max diff {:.2e}",
        from_map
            .values
            .iter()
            .zip(&cls.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    );
}
