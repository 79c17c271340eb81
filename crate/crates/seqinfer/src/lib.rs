//! Confidence intervals after sequential stopping.
//!
//! When a study stops the moment a test statistic crosses a boundary, the
//! stopped sample mean is biased toward the boundary and the usual
//! fixed-sample intervals miscover — often badly, and asymmetrically.
//! This crate implements inference that accounts for the stopping rule:
//!
//! * [`stopping`] — truncated fully-sequential stopping rules of the form
//!   `T = min(n0, inf{n >= n1 : n g(S_n/n) >= a})` and the machinery to
//!   run them over observation streams;
//! * [`pivots`] — naive, bias-corrected, and renormalized roots for smooth
//!   functionals of the stopped mean, with the first-order bias functional
//!   `b(mu, V)` they rest on;
//! * [`resampling`] — bootstrap, hybrid, and parametric-exact schemes that
//!   re-run the stopping rule inside each resample so the root's sampling
//!   distribution reflects the design;
//! * [`intervals`] — interval constructors: closed-form normal and
//!   Student-t flavors, bootstrap quantile inversion, and grid-based
//!   hybrid/exact acceptance scans;
//! * [`harness`] — Monte Carlo experiments (quantile tables and coverage
//!   studies) driven by JSON configs, with deterministic, order-independent
//!   parallel aggregation;
//! * [`sampling`] — counter-based random streams and the sampling
//!   populations used by the experiments;
//! * [`numerics`] — the special-function and quadrature-free numeric
//!   kernels everything else leans on;
//! * [`report`] — dataset loading and CSV/JSON report writing.
//!
//! The `seqinfer` binary exposes the harness and the single-dataset
//! interval constructors as a command-line tool. Runnable walkthroughs of
//! each capability live in `examples/`.

pub mod error;
pub mod harness;
pub mod intervals;
pub mod numerics;
pub mod pivots;
pub mod report;
pub mod resampling;
pub mod sampling;
pub mod stopping;

pub use error::{Error, Result};
pub use harness::{
    build_interval, check_method_compat, run_coverage, run_quantile_table, simulate_summaries,
    BoundaryConfig, ExperimentConfig, GridConfig, PopulationConfig, ScenarioConfig, TrialSummary,
};
pub use intervals::{
    bootstrap_interval, exact_interval, hybrid_interval, normal_bias_corrected_interval,
    normal_naive_interval, normal_renormalized_interval, t_bias_corrected_interval,
    t_naive_interval, DiagnosticFlag, Diagnostics, GridSpec, IntervalResult, MethodTag,
};
pub use pivots::{
    bias, bias_corrected_pivot, grad_kappa_sqrt, moment_estimates, naive_pivot,
    renormalized_pivot, Cov, KappaGradient, MomentEstimates, SmoothFn, VarianceMode,
};
pub use report::{
    fmt_sig, load_dataset, write_report, CoverageReport, CoverageRow, FailureRecord,
    QuantileRow, QuantileStatistic, QuantileTable, Report, ReportFormat, QUANTILE_LEVELS_PCT,
};
pub use resampling::{
    quantile_pair, simulate_root_distribution, ResamplingFamily, RootKind, RootSpec,
};
pub use sampling::{make_stream, ObservationMap, Population, RandomStream};
pub use stopping::{run_trial, stopping_time_of, BoundaryFn, StoppedSample, StoppingRule};
