//! Simulate a truncated sequential test and look at the stopping time.
//!
//! The rule stops the first time `n * g(Xbar_n) >= a` (here `g(x) = x^2/2`
//! with `a = 4.5`, i.e. stop when `|S_n| >= 3 sqrt(n)`), never before
//! `n1 = 15` and never after `n0 = 75`. Run it at several drifts and print
//! how the stopping time distributes: small drifts mostly run to the
//! truncation point, large drifts stop almost immediately.
//!
//! ```bash
//! cargo run --release --example stopping_times
//! ```

use seqinfer::{run_trial, ObservationMap, Population, RandomStream, StoppingRule};

fn main() -> seqinfer::Result<()> {
    let rule = StoppingRule::repeated_significance(3.0, 15, 75)?;
    let n_sims = 20_000usize;

    println!(
        "rule: stop when |S_n| >= 3 sqrt(n), constrained to {} <= T <= {}",
        rule.n1(),
        rule.n0()
    );
    println!("{} trials per drift\n", n_sims);
    println!("{:>5}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}", "mu", "mean_T", "sd_T", "P(T=n1)", "P(T=n0)", "mean_Xb");

    for (idx, &mu) in [0.0, 0.2, 0.5, 1.0, 2.0].iter().enumerate() {
        let pop = Population::normal(mu, 1.0)?;
        let mut sum_t = 0.0;
        let mut sum_t2 = 0.0;
        let mut at_floor = 0usize;
        let mut at_ceiling = 0usize;
        let mut sum_mean = 0.0;

        for r in 0..n_sims {
            // One stream per (drift, replicate) keeps runs reproducible and
            // independent of loop order.
            let mut stream = RandomStream::new(7, idx as u64).child(r as u64);
            let sample = run_trial(&rule, &pop, ObservationMap::Identity, &mut stream)?;
            let t = sample.t() as f64;
            sum_t += t;
            sum_t2 += t * t;
            at_floor += usize::from(sample.t() == rule.n1());
            at_ceiling += usize::from(sample.t() == rule.n0());
            sum_mean += sample.mean()[0];
        }

        let n = n_sims as f64;
        let mean_t = sum_t / n;
        let sd_t = (sum_t2 / n - mean_t * mean_t).max(0.0).sqrt();
        println!(
            "{:>5.2}  {:>8.2}  {:>8.2}  {:>8.3}  {:>8.3}  {:>8.4}",
            mu,
            mean_t,
            sd_t,
            at_floor as f64 / n,
            at_ceiling as f64 / n,
            sum_mean / n,
        );
    }

    println!("\nNote the last column: conditioning on when the test stopped");
    println!("biases the running mean away from the true drift. That bias is");
    println!("what the corrected intervals in the other examples remove.");
    Ok(())
}
