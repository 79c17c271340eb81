//! Run a small Monte Carlo coverage study end to end.
//!
//! The harness repeats the whole pipeline — draw a sequence, stop it, build
//! intervals — thousands of times per true mean and reports how often each
//! method's interval misses on each side. A method with honest 90% two-sided
//! intervals should miss about 5% low and 5% high everywhere. The naive
//! interval does not; the corrected ones come much closer.
//!
//! This is the same engine as `seqinfer coverage`; the configuration below
//! is exactly what that command reads from a JSON file.
//!
//! ```bash
//! cargo run --release --example coverage_study
//! ```

use seqinfer::{run_coverage, ExperimentConfig};

fn main() -> seqinfer::Result<()> {
    let config = ExperimentConfig::from_json(
        r#"{
            "scenario": {
                "g": {"name": "quadratic"},
                "a": 4.5, "n0": 75, "n1": 15,
                "map": "identity", "variance": "known_unit"
            },
            "population": {"variant": "normal", "sigma": 1.0},
            "mu_list": [0.0, 0.2, 0.4, 0.8],
            "methods": ["normal_naive", "normal_bias_corrected", "normal_renormalized", "boot_bias_corrected"],
            "alpha": 0.05,
            "n_sims": 4000,
            "B": 600,
            "seed": 42
        }"#,
    )?;

    eprintln!(
        "{} trials x {} means x {} methods (bootstrap uses {} resamples) ...",
        config.n_sims,
        config.mu_list.len(),
        config.methods.len(),
        config.b_reps
    );

    let report = run_coverage(&config)?;

    // `L_pct` / `U_pct` are the percentages of runs whose interval fell
    // entirely above / below the true mean; each should sit near 5.
    print!("{}", report.to_csv());

    eprintln!("\nread `L_pct`/`U_pct` against the nominal 5.00 per side;");
    eprintln!("`normal_naive` misses low more than twice as often as it");
    eprintln!("should at mu = 0.2 and drifts conservative on the upper side");
    eprintln!("at larger means, while the corrected methods stay near 5.");
    Ok(())
}
