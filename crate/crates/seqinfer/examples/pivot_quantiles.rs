//! Compare the sampling quantiles of the three approximate pivots.
//!
//! After a truncated sequential test the naive standardized root
//! `R0 = sqrt(T)(Xbar - mu)` is not close to standard normal: optional
//! stopping skews it, and the skew changes sign and size with the drift.
//! The bias-corrected root `R1` subtracts an estimate of that skew, and the
//! renormalized root also rescales. This example simulates all three at a
//! few drifts and prints selected quantiles next to the standard normal
//! values they are supposed to approach.
//!
//! ```bash
//! cargo run --release --example pivot_quantiles
//! ```

use seqinfer::ExperimentConfig;

fn main() -> seqinfer::Result<()> {
    // The smoothed absolute-value boundary stops when n * g(Xbar_n) >= 9,
    // where g(x) = |x| away from zero with a quadratic blend on [-0.5, 0.5];
    // the test is truncated at n0 = 72 and may stop from the first draw.
    let config = ExperimentConfig::from_json(
        r#"{
            "scenario": {
                "g": {"name": "smoothed_abs", "delta": 0.5},
                "a": 9.0, "n0": 72, "n1": 1
            },
            "population": {"variant": "normal"},
            "mu_list": [0.0, 0.5, 1.0],
            "methods": ["normal_naive"],
            "alpha": 0.05,
            "n_sims": 40000,
            "seed": 11
        }"#,
    )?;

    let table = seqinfer::run_quantile_table(&config)?;

    // Pick out the 2.5%, 50% and 97.5% columns (indices 0, 4, 8).
    let n01 = [-1.95996, 0.0, 1.95996];
    println!("{} simulated trials per drift\n", config.n_sims);
    println!(
        "{:>5}  {:<28}  {:>9}  {:>9}  {:>9}",
        "mu", "statistic", "q2.5", "q50", "q97.5"
    );
    println!(
        "{:>5}  {:<28}  {:>9.3}  {:>9.3}  {:>9.3}   <- N(0,1) reference",
        "", "", n01[0], n01[1], n01[2]
    );
    for row in &table.rows {
        println!(
            "{:>5.2}  {:<28}  {:>9.3}  {:>9.3}  {:>9.3}",
            row.mu,
            row.statistic.as_str(),
            row.quantiles[0],
            row.quantiles[4],
            row.quantiles[8],
        );
    }

    println!("\nThe naive root's tails wander with the drift; the corrected");
    println!("and renormalized roots hold close to the normal reference, so");
    println!("normal-quantile intervals built from them are nearly honest.");
    Ok(())
}
