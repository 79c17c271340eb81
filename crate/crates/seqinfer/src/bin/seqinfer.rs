//! Command-line interface: simulate stopped trials, build a confidence
//! interval for one dataset, tabulate root quantiles, or run a coverage
//! study.
//!
//! Exit codes: 0 on success, 2 for configuration/usage errors, 3 for
//! runtime errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use seqinfer::harness::{build_interval, simulate_summaries, BoundaryConfig, ScenarioConfig};
use seqinfer::report::{fmt_sig, load_dataset, write_report, ReportFormat};
use seqinfer::{
    run_coverage, run_quantile_table, Error, ExperimentConfig, MethodTag, ObservationMap,
    RandomStream, StoppedSample, VarianceMode,
};

#[derive(Parser)]
#[command(
    name = "seqinfer",
    version,
    about = "Confidence intervals and coverage studies after sequential stopping"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate stopped trials per configured mean; prints CSV summaries.
    Simulate {
        /// Experiment configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Master seed, overriding the config's.
        #[arg(long)]
        seed: u64,
        /// Trials per mean.
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
    /// Build one confidence interval from a data file; prints JSON.
    Interval {
        /// Scalar observations: one per line, or single-column CSV with
        /// header "x". The file is taken to be a realized stopped sample.
        #[arg(long)]
        data: PathBuf,
        /// Stopping-rule scenario: a preset name (repeated_significance,
        /// smoothed_abs, studentized) or a path to a scenario JSON file.
        #[arg(long)]
        rule: String,
        /// Interval method tag (e.g. normal_naive, boot_bias_corrected,
        /// hybrid, exact).
        #[arg(long)]
        method: String,
        /// One-sided error; the interval targets confidence 1 - 2*alpha.
        #[arg(long)]
        alpha: f64,
        /// Resampling replicates for bootstrap/hybrid/exact methods.
        #[arg(long, default_value_t = 1000)]
        bootstrap: usize,
        /// Seed for any resampling the method performs.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Tabulate empirical root quantiles over simulated trials.
    Quantiles {
        /// Experiment configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output path.
        #[arg(long)]
        out: PathBuf,
        /// Output format.
        #[arg(long, default_value = "csv")]
        format: String,
        /// Rerun the table for each smoothing width, writing one output
        /// per value next to --out (requires the smoothed_abs boundary).
        #[arg(long, value_delimiter = ',')]
        delta_sweep: Option<Vec<f64>>,
    },
    /// Run a coverage study over the configured methods and means.
    Coverage {
        /// Experiment configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output path.
        #[arg(long)]
        out: PathBuf,
        /// Output format.
        #[arg(long, default_value = "csv")]
        format: String,
        /// Worker threads for the replicate loop (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

/// Which exit code an error deserves. Configuration and input-shape
/// problems are 2; everything else (I/O during output, numeric failures)
/// is 3.
fn exit_code_for(err: &Error, loading_inputs: bool) -> u8 {
    match err {
        Error::InvalidConfig(_)
        | Error::InvalidRule(_)
        | Error::Json(_)
        | Error::DatasetParse { .. }
        | Error::DimensionMismatch(_) => 2,
        Error::Io { .. } if loading_inputs => 2,
        _ => 3,
    }
}

fn fail(err: Error, loading_inputs: bool) -> ExitCode {
    eprintln!("seqinfer: {err}");
    ExitCode::from(exit_code_for(&err, loading_inputs))
}

/// Example scenarios from the source tables, by preset name; anything
/// else is read as a scenario JSON file.
fn resolve_scenario(rule: &str) -> Result<ScenarioConfig, Error> {
    let preset = |g, a, n0, n1, map, variance| ScenarioConfig {
        g,
        a,
        n0,
        n1,
        map,
        variance,
    };
    match rule {
        "repeated_significance" => Ok(preset(
            BoundaryConfig::Quadratic,
            4.5,
            75,
            15,
            ObservationMap::Identity,
            VarianceMode::KnownUnit,
        )),
        "smoothed_abs" => Ok(preset(
            BoundaryConfig::SmoothedAbs { delta: 0.5 },
            9.0,
            72,
            1,
            ObservationMap::Identity,
            VarianceMode::KnownUnit,
        )),
        "studentized" => Ok(preset(
            BoundaryConfig::Studentized,
            4.5,
            75,
            15,
            ObservationMap::SquareLift,
            VarianceMode::Estimated,
        )),
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.to_string(),
                source: e,
            })?;
            let scenario: ScenarioConfig = serde_json::from_str(&text)?;
            scenario.rule()?; // validate constants eagerly
            Ok(scenario)
        }
    }
}

fn cmd_simulate(config: &Path, seed: u64, trials: usize) -> ExitCode {
    let mut config = match ExperimentConfig::load(config) {
        Ok(c) => c,
        Err(e) => return fail(e, true),
    };
    config.seed = seed;
    let summaries = match simulate_summaries(&config, trials) {
        Ok(s) => s,
        Err(e) => return fail(e, false),
    };
    println!("mu,replicate,T,estimate");
    for s in summaries {
        println!(
            "{},{},{},{}",
            fmt_sig(s.mu),
            s.replicate,
            s.t,
            fmt_sig(s.estimate)
        );
    }
    ExitCode::SUCCESS
}

fn cmd_interval(
    data: &Path,
    rule: &str,
    method: &str,
    alpha: f64,
    bootstrap: usize,
    seed: u64,
) -> ExitCode {
    let loaded = (|| -> Result<(StoppedSample, ScenarioConfig, MethodTag), Error> {
        let scenario = resolve_scenario(rule)?;
        let method = MethodTag::parse(method)?;
        let scalars = load_dataset(data)?;
        let sample = StoppedSample::from_scalars(scalars, scenario.map)?;
        Ok((sample, scenario, method))
    })();
    let (sample, scenario, method) = match loaded {
        Ok(v) => v,
        Err(e) => return fail(e, true),
    };
    let stream = RandomStream::new(seed, 0);
    match build_interval(&sample, &scenario, method, alpha, bootstrap, &stream) {
        Ok(interval) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&interval).expect("interval serializes")
            );
            ExitCode::SUCCESS
        }
        Err(e @ Error::InvalidConfig(_)) => fail(e, true),
        Err(e) => fail(e, false),
    }
}

/// Insert a `.delta<value>` tag before the output extension.
fn sweep_path(out: &Path, delta: f64) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
    let name = match out.extension().and_then(|s| s.to_str()) {
        Some(ext) => format!("{stem}.delta{delta}.{ext}"),
        None => format!("{stem}.delta{delta}"),
    };
    out.with_file_name(name)
}

fn cmd_quantiles(
    config: &Path,
    out: &Path,
    format: &str,
    delta_sweep: Option<&[f64]>,
) -> ExitCode {
    let (config, format) = match ExperimentConfig::load(config)
        .and_then(|c| Ok((c, ReportFormat::parse(format)?)))
    {
        Ok(v) => v,
        Err(e) => return fail(e, true),
    };
    let deltas: Vec<Option<f64>> = match delta_sweep {
        None => vec![None],
        Some(list) if list.is_empty() => vec![None],
        Some(list) => {
            if !matches!(config.scenario.g, BoundaryConfig::SmoothedAbs { .. }) {
                return fail(
                    Error::InvalidConfig(
                        "--delta-sweep requires the smoothed_abs boundary".into(),
                    ),
                    true,
                );
            }
            list.iter().map(|d| Some(*d)).collect()
        }
    };
    for delta in deltas {
        let (run_config, path) = match delta {
            None => (config.clone(), out.to_path_buf()),
            Some(d) => {
                let mut c = config.clone();
                c.scenario.g = BoundaryConfig::SmoothedAbs { delta: d };
                (c, sweep_path(out, d))
            }
        };
        let table = match run_quantile_table(&run_config) {
            Ok(t) => t,
            Err(e @ Error::InvalidConfig(_)) => return fail(e, true),
            Err(e) => return fail(e, false),
        };
        if let Err(e) = write_report(&table, &path, format) {
            return fail(e, false);
        }
        eprintln!("wrote {}", path.display());
    }
    ExitCode::SUCCESS
}

fn cmd_coverage(config: &Path, out: &Path, format: &str, jobs: Option<usize>) -> ExitCode {
    let (config, format) = match ExperimentConfig::load(config)
        .and_then(|c| Ok((c, ReportFormat::parse(format)?)))
    {
        Ok(v) => v,
        Err(e) => return fail(e, true),
    };
    if let Some(n) = jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("seqinfer: could not size thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    let report = match run_coverage(&config) {
        Ok(r) => r,
        Err(e @ Error::InvalidConfig(_)) => return fail(e, true),
        Err(e) => return fail(e, false),
    };
    for f in &report.failures {
        eprintln!(
            "warning: {} of {} replicates failed for {} at mu={}",
            f.count,
            report.n_sims,
            f.method.as_str(),
            fmt_sig(f.mu)
        );
    }
    if let Err(e) = write_report(&report, out, format) {
        return fail(e, false);
    }
    eprintln!("wrote {}", out.display());
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Simulate {
            config,
            seed,
            trials,
        } => cmd_simulate(&config, seed, trials),
        Command::Interval {
            data,
            rule,
            method,
            alpha,
            bootstrap,
            seed,
        } => cmd_interval(&data, &rule, &method, alpha, bootstrap, seed),
        Command::Quantiles {
            config,
            out,
            format,
            delta_sweep,
        } => cmd_quantiles(&config, &out, &format, delta_sweep.as_deref()),
        Command::Coverage {
            config,
            out,
            format,
            jobs,
        } => cmd_coverage(&config, &out, &format, jobs),
    }
}
