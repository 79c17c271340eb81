//! Build every closed-form confidence interval for one stopped data set.
//!
//! A single sequence is run through the repeated-significance rule, then the
//! naive, bias-corrected and renormalized normal intervals (known unit
//! variance) and the t-based intervals (estimated variance) are printed side
//! by side. The corrected intervals shift the naive one by `-b_hat/T`, where
//! `b_hat` estimates how far optional stopping drags the running mean.
//!
//! ```bash
//! cargo run --release --example interval_methods
//! ```

use seqinfer::{
    normal_bias_corrected_interval, normal_naive_interval, normal_renormalized_interval,
    run_trial, t_bias_corrected_interval, t_naive_interval, IntervalResult, ObservationMap,
    Population, RandomStream, SmoothFn, StoppingRule, VarianceMode,
};

fn show(label: &str, ival: &IntervalResult) {
    println!(
        "{:<24}  ({:>8.4}, {:>8.4})   width {:>7.4}",
        label,
        ival.lower,
        ival.upper,
        ival.width(),
    );
}

fn main() -> seqinfer::Result<()> {
    let rule = StoppingRule::repeated_significance(3.0, 15, 75)?;
    let pop = Population::normal(0.4, 1.0)?;
    let mut stream = RandomStream::new(2026, 0);
    let sample = run_trial(&rule, &pop, ObservationMap::Identity, &mut stream)?;

    let h = SmoothFn::identity();
    let alpha = 0.05; // 5% in each tail -> nominal 90% two-sided coverage
    let xbar = sample.mean()[0];

    println!("one run at true mean 0.4:");
    println!(
        "  stopped at T = {}, running mean Xbar = {:.4}\n",
        sample.t(),
        xbar
    );

    println!("known unit variance, normal quantiles:");
    show(
        "  naive",
        &normal_naive_interval(&sample, &h, alpha, VarianceMode::KnownUnit)?,
    );
    show(
        "  bias-corrected",
        &normal_bias_corrected_interval(&sample, &rule, &h, alpha, VarianceMode::KnownUnit)?,
    );
    show(
        "  renormalized",
        &normal_renormalized_interval(&sample, &rule, alpha)?,
    );

    println!("\nvariance estimated from the data, t quantiles (T - that is,");
    println!("{} - degrees of freedom):", sample.t());
    show("  t naive", &t_naive_interval(&sample, &h, alpha)?);
    show(
        "  t bias-corrected",
        &t_bias_corrected_interval(&sample, &rule, &h, alpha)?,
    );

    let corrected = normal_bias_corrected_interval(&sample, &rule, &h, alpha, VarianceMode::KnownUnit)?;
    if let Some(b) = corrected.diagnostics.bias {
        println!(
            "\nestimated stopping bias b_hat = {:.4}; every corrected interval",
            b
        );
        println!(
            "above is the matching uncorrected one shifted by -b_hat/T = {:.4}.",
            -b / sample.t() as f64
        );
    }
    Ok(())
}
