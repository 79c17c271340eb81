//! Monte Carlo experiment harness: quantile tables and coverage studies
//! over simulated sequential trials, driven by JSON configuration files.
//!
//! The two entry points are [`run_quantile_table`] (empirical quantiles of
//! the naive / bias-corrected / renormalized roots over repeated trials)
//! and [`run_coverage`] (one-sided coverage errors of each configured
//! interval method). Both are deterministic functions of the
//! configuration: replicate `r` draws from a stream keyed by
//! `(seed, r)`, with per-mean and per-method substreams derived by
//! `child`, so reports are byte-identical across reruns and thread
//! schedules. Replicates run in parallel; aggregation folds an ordered
//! vector of per-replicate records sequentially.

use rayon::prelude::*;
use serde::Deserialize;
use std::path::Path;

use crate::error::{Error, Result};
use crate::intervals::{
    bootstrap_interval, exact_interval, hybrid_interval, normal_bias_corrected_interval,
    normal_naive_interval, normal_renormalized_interval, t_bias_corrected_interval,
    t_naive_interval, Diagnostics, GridSpec, IntervalResult, MethodTag,
};
use crate::pivots::{
    bias_corrected_pivot, naive_pivot, renormalized_pivot, SmoothFn, VarianceMode,
};
use crate::report::{
    CoverageReport, CoverageRow, FailureRecord, QuantileRow, QuantileStatistic, QuantileTable,
    QUANTILE_LEVELS_PCT,
};
use crate::resampling::{ResamplingFamily, RootKind, RootSpec};
use crate::sampling::{ObservationMap, Population, RandomStream};
use crate::stopping::{run_trial, BoundaryFn, StoppedSample, StoppingRule};

fn default_b() -> usize {
    1000
}

fn default_delta() -> f64 {
    0.5
}

fn default_map() -> ObservationMap {
    ObservationMap::Identity
}

fn default_variance() -> VarianceMode {
    VarianceMode::KnownUnit
}

fn default_grid_points() -> usize {
    161
}

fn default_grid_factor() -> f64 {
    8.0
}

/// Stopping-boundary choice by name, with parameters.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryConfig {
    /// `g(x) = x^2 / 2` (repeated significance testing).
    Quadratic,
    /// `g(x) = (delta^2 + x^2) / (2 delta)` for `|x| <= delta`, `|x|`
    /// beyond; `delta` defaults to 0.5.
    SmoothedAbs {
        #[serde(default = "default_delta")]
        delta: f64,
    },
    /// `g(eta, m2) = eta^2 / (2 (m2 - eta^2))` on lifted observations
    /// `(x, x^2)` — the studentized boundary for unknown variance.
    Studentized,
}

/// Stopping rule, observation map, and variance mode for an experiment.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub g: BoundaryConfig,
    pub a: f64,
    pub n0: usize,
    pub n1: usize,
    #[serde(default = "default_map")]
    pub map: ObservationMap,
    #[serde(default = "default_variance")]
    pub variance: VarianceMode,
}

impl ScenarioConfig {
    pub fn rule(&self) -> Result<StoppingRule> {
        let boundary = match &self.g {
            BoundaryConfig::Quadratic => BoundaryFn::Quadratic,
            BoundaryConfig::SmoothedAbs { delta } => BoundaryFn::SmoothedAbs { delta: *delta },
            BoundaryConfig::Studentized => BoundaryFn::Studentized,
        };
        StoppingRule::new(boundary, self.a, self.n1, self.n0)
    }
}

/// Sampling population family; the experiment's true mean is supplied per
/// entry of `mu_list`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum PopulationConfig {
    /// `N(mu, sigma^2)`; `sigma` defaults to 1.
    Normal {
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    /// The unit-variance 0.2/0.8 normal/centered-exponential mixture.
    Mixture,
}

fn default_sigma() -> f64 {
    1.0
}

impl PopulationConfig {
    pub fn at(&self, mu: f64) -> Result<Population> {
        match self {
            PopulationConfig::Normal { sigma } => Population::normal(mu, *sigma),
            PopulationConfig::Mixture => Ok(Population::mixture(mu)),
        }
    }
}

/// Grid overrides for the hybrid/exact scans.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_grid_points")]
    pub points: usize,
    /// Half-width in units of `max(sigma_hat, 1) / sqrt(T)`.
    #[serde(default = "default_grid_factor")]
    pub half_width_factor: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            points: default_grid_points(),
            half_width_factor: default_grid_factor(),
        }
    }
}

/// A full experiment: scenario, population, true means, methods, sizes,
/// and the master seed. Unknown JSON fields are rejected.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub population: PopulationConfig,
    pub mu_list: Vec<f64>,
    pub methods: Vec<MethodTag>,
    pub alpha: f64,
    pub n_sims: usize,
    #[serde(rename = "B", default = "default_b")]
    pub b_reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub grid: Option<GridConfig>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        ExperimentConfig::from_json(&text)
    }

    /// Structural validation beyond what serde enforces.
    pub fn validate(&self) -> Result<()> {
        let rule = self.scenario.rule()?;
        if self.scenario.map.d() != rule.d() {
            return Err(Error::InvalidConfig(format!(
                "observation map dimension {} does not match boundary dimension {}",
                self.scenario.map.d(),
                rule.d()
            )));
        }
        if self.mu_list.is_empty() || self.mu_list.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidConfig(
                "mu_list must be a nonempty list of finite means".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("methods must be nonempty".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 0.5), got {}",
                self.alpha
            )));
        }
        if self.n_sims == 0 {
            return Err(Error::InvalidConfig("n_sims must be at least 1".into()));
        }
        if self.b_reps == 0 {
            return Err(Error::InvalidConfig("B must be at least 1".into()));
        }
        if let Some(g) = &self.grid {
            if g.points < 3 || g.points % 2 == 0 || !(g.half_width_factor > 0.0) {
                return Err(Error::InvalidConfig(
                    "grid needs an odd point count >= 3 and a positive half_width_factor".into(),
                ));
            }
        }
        for method in &self.methods {
            check_method_compat(&self.scenario, *method)?;
        }
        Ok(())
    }
}

/// Whether `method` is usable under `scenario`'s variance mode and
/// dimension: t-intervals need estimated variance; the hybrid, exact, and
/// renormalized constructions need a scalar identity scenario with known
/// unit variance.
pub fn check_method_compat(scenario: &ScenarioConfig, method: MethodTag) -> Result<()> {
    let scalar_identity = scenario.g != BoundaryConfig::Studentized
        && scenario.map == ObservationMap::Identity;
    match method {
        MethodTag::TNaive | MethodTag::TBiasCorrected => {
            if scenario.variance != VarianceMode::Estimated {
                return Err(Error::InvalidConfig(format!(
                    "{method} requires an estimated-variance scenario"
                )));
            }
        }
        MethodTag::Hybrid | MethodTag::Exact | MethodTag::NormalRenormalized => {
            if scenario.variance != VarianceMode::KnownUnit || !scalar_identity {
                return Err(Error::InvalidConfig(format!(
                    "{method} requires a scalar identity scenario with known unit variance"
                )));
            }
        }
        _ => {}
    }
    Ok(())
}

/// Build one interval for an already-stopped sample under `scenario` —
/// the single-dataset path behind the CLI's `interval` command. `stream`
/// seeds any resampling the method performs.
pub fn build_interval(
    trial: &StoppedSample,
    scenario: &ScenarioConfig,
    method: MethodTag,
    alpha: f64,
    b_reps: usize,
    stream: &RandomStream,
) -> Result<IntervalResult> {
    check_method_compat(scenario, method)?;
    let ctx = RunContext::new(scenario, alpha, b_reps, None)?;
    ctx.build_interval(trial, method, stream)
}

// ---------------------------------------------------------------------------
// Shared experiment context
// ---------------------------------------------------------------------------

/// Everything per-replicate work needs, resolved once per run.
struct RunContext {
    rule: StoppingRule,
    h: SmoothFn,
    map: ObservationMap,
    variance: VarianceMode,
    alpha: f64,
    b_reps: usize,
    grid: GridConfig,
}

impl RunContext {
    fn new(
        scenario: &ScenarioConfig,
        alpha: f64,
        b_reps: usize,
        grid: Option<GridConfig>,
    ) -> Result<Self> {
        Ok(RunContext {
            rule: scenario.rule()?,
            h: SmoothFn::Coordinate(0),
            map: scenario.map,
            variance: scenario.variance,
            alpha,
            b_reps,
            grid: grid.unwrap_or_default(),
        })
    }

    fn from_config(config: &ExperimentConfig) -> Result<Self> {
        RunContext::new(
            &config.scenario,
            config.alpha,
            config.b_reps,
            config.grid,
        )
    }

    fn grid_for(&self, trial: &StoppedSample) -> Result<GridSpec> {
        let scale = 1.0; // grid methods are validated to known-unit scenarios
        let half_width =
            self.grid.half_width_factor * scale / (trial.t() as f64).sqrt();
        GridSpec::new(self.h.eval(trial.mean()), half_width, self.grid.points)
    }

    fn root_spec(&self, kind: RootKind) -> Result<RootSpec> {
        RootSpec::new(
            kind,
            self.rule.clone(),
            self.map,
            self.h.clone(),
            self.variance,
        )
    }

    /// Build one method's interval for a stopped trial. `stream` seeds any
    /// resampling the method performs.
    fn build_interval(
        &self,
        trial: &StoppedSample,
        method: MethodTag,
        stream: &RandomStream,
    ) -> Result<IntervalResult> {
        match method {
            MethodTag::NormalNaive => {
                normal_naive_interval(trial, &self.h, self.alpha, self.variance)
            }
            MethodTag::NormalBiasCorrected => normal_bias_corrected_interval(
                trial,
                &self.rule,
                &self.h,
                self.alpha,
                self.variance,
            ),
            MethodTag::NormalRenormalized => {
                normal_renormalized_interval(trial, &self.rule, self.alpha)
            }
            MethodTag::TNaive => t_naive_interval(trial, &self.h, self.alpha),
            MethodTag::TBiasCorrected => {
                t_bias_corrected_interval(trial, &self.rule, &self.h, self.alpha)
            }
            MethodTag::BootNaive => bootstrap_interval(
                trial,
                &self.root_spec(RootKind::Naive)?,
                self.alpha,
                self.b_reps,
                stream,
            ),
            MethodTag::BootBiasCorrected => bootstrap_interval(
                trial,
                &self.root_spec(RootKind::BiasCorrected)?,
                self.alpha,
                self.b_reps,
                stream,
            ),
            MethodTag::Hybrid => hybrid_interval(
                trial,
                &self.root_spec(RootKind::Naive)?,
                self.alpha,
                self.b_reps,
                &self.grid_for(trial)?,
                stream,
            ),
            // The exact method asserts a normal model by design; run it
            // under N(theta, 1) whatever the data-generating population.
            MethodTag::Exact => exact_interval(
                trial,
                &self.rule,
                &ResamplingFamily::parametric_normal(),
                self.alpha,
                self.b_reps,
                &self.grid_for(trial)?,
                stream,
            ),
            MethodTag::WholeLine => Ok(IntervalResult {
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
                method: MethodTag::WholeLine,
                alpha: self.alpha,
                diagnostics: Diagnostics::default(),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Coverage studies
// ---------------------------------------------------------------------------

/// One replicate's outcome for one method.
#[derive(Debug, Clone, Copy)]
enum MethodOutcome {
    Built {
        l_miss: bool,
        u_miss: bool,
        length: f64,
    },
    Failed,
}

struct ReplicateRecord {
    t: usize,
    outcomes: Vec<MethodOutcome>,
}

/// For each configured true mean and method, estimate the one-sided
/// coverage errors: the percentage of replicates whose lower limit sits
/// strictly above the truth (L) or whose upper limit sits strictly below
/// it (U), with binomial standard errors, plus mean interval length and
/// mean stopping time.
pub fn run_coverage(config: &ExperimentConfig) -> Result<CoverageReport> {
    config.validate()?;
    let ctx = RunContext::from_config(config)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();

    for (m_idx, &mu) in config.mu_list.iter().enumerate() {
        let pop = config.population.at(mu)?;
        let records: Vec<ReplicateRecord> = (0..config.n_sims)
            .into_par_iter()
            .map(|r| -> Result<ReplicateRecord> {
                let mu_base = RandomStream::new(config.seed, r as u64).child(m_idx as u64);
                let mut trial_stream = mu_base.child(0);
                let trial = run_trial(&ctx.rule, &pop, ctx.map, &mut trial_stream)?;
                let outcomes = config
                    .methods
                    .iter()
                    .enumerate()
                    .map(|(j, &method)| {
                        let method_stream = mu_base.child(1 + j as u64);
                        match ctx.build_interval(&trial, method, &method_stream) {
                            Ok(iv) => MethodOutcome::Built {
                                l_miss: iv.lower > mu,
                                u_miss: iv.upper < mu,
                                length: iv.width(),
                            },
                            Err(_) => MethodOutcome::Failed,
                        }
                    })
                    .collect();
                Ok(ReplicateRecord {
                    t: trial.t(),
                    outcomes,
                })
            })
            .collect::<Result<_>>()?;

        for (j, &method) in config.methods.iter().enumerate() {
            let mut n_eff = 0usize;
            let mut l_cnt = 0usize;
            let mut u_cnt = 0usize;
            let mut len_sum = 0.0;
            let mut t_sum = 0.0;
            for rec in &records {
                match rec.outcomes[j] {
                    MethodOutcome::Built {
                        l_miss,
                        u_miss,
                        length,
                    } => {
                        n_eff += 1;
                        l_cnt += l_miss as usize;
                        u_cnt += u_miss as usize;
                        len_sum += length;
                        t_sum += rec.t as f64;
                    }
                    MethodOutcome::Failed => {}
                }
            }
            let failed = config.n_sims - n_eff;
            if failed > 0 {
                failures.push(FailureRecord {
                    mu,
                    method,
                    count: failed,
                });
            }
            let n = n_eff as f64;
            let (l_pct, u_pct, l_se, u_se, mean_length, mean_t) = if n_eff == 0 {
                (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN)
            } else {
                let lp = l_cnt as f64 / n;
                let up = u_cnt as f64 / n;
                (
                    100.0 * lp,
                    100.0 * up,
                    100.0 * (lp * (1.0 - lp) / n).sqrt(),
                    100.0 * (up * (1.0 - up) / n).sqrt(),
                    len_sum / n,
                    t_sum / n,
                )
            };
            rows.push(CoverageRow {
                mu,
                method,
                l_pct,
                u_pct,
                l_se,
                u_se,
                mean_length,
                mean_t,
            });
        }
    }

    Ok(CoverageReport {
        alpha: config.alpha,
        n_sims: config.n_sims,
        rows,
        failures,
    })
}

// ---------------------------------------------------------------------------
// Quantile tables
// ---------------------------------------------------------------------------

const QUANTILE_STATISTICS: [QuantileStatistic; 4] = [
    QuantileStatistic::Naive,
    QuantileStatistic::BiasCorrected,
    QuantileStatistic::BiasCorrectedStudentized,
    QuantileStatistic::Renormalized,
];

/// Empirical quantiles of the four roots, evaluated at the true mean, over
/// `n_sims` simulated trials per entry of `mu_list`.
///
/// Requires a scalar identity scenario with known unit variance and a
/// normal population: the tabulated statistics are the known-variance
/// naive/bias-corrected/renormalized roots plus the bias-corrected root
/// with the plug-in standard deviation. Trials where a statistic is
/// undefined (for instance the plug-in deviation of a zero-variance
/// sample) are dropped from that statistic's quantiles; if every trial
/// drops, the row is all-NaN.
pub fn run_quantile_table(config: &ExperimentConfig) -> Result<QuantileTable> {
    config.validate()?;
    if !matches!(config.population, PopulationConfig::Normal { .. }) {
        return Err(Error::InvalidConfig(
            "quantile tables require a normal population".into(),
        ));
    }
    let ctx = RunContext::from_config(config)?;
    if ctx.rule.d() != 1
        || ctx.map != ObservationMap::Identity
        || ctx.variance != VarianceMode::KnownUnit
    {
        return Err(Error::InvalidConfig(
            "quantile tables require a scalar identity scenario with known unit variance".into(),
        ));
    }

    let mut rows = Vec::new();
    for (m_idx, &mu) in config.mu_list.iter().enumerate() {
        let pop = config.population.at(mu)?;
        let per_trial: Vec<[Option<f64>; 4]> = (0..config.n_sims)
            .into_par_iter()
            .map(|r| -> Result<[Option<f64>; 4]> {
                let mut stream = RandomStream::new(config.seed, r as u64)
                    .child(m_idx as u64)
                    .child(0);
                let trial = run_trial(&ctx.rule, &pop, ctx.map, &mut stream)?;
                let naive = naive_pivot(&trial, &ctx.h, mu, VarianceMode::KnownUnit).ok();
                let corrected =
                    bias_corrected_pivot(&trial, &ctx.rule, &ctx.h, mu, VarianceMode::KnownUnit)
                        .ok();
                let studentized =
                    bias_corrected_pivot(&trial, &ctx.rule, &ctx.h, mu, VarianceMode::Estimated)
                        .ok();
                let renormalized = renormalized_pivot(&trial, &ctx.rule, mu).ok();
                Ok([naive, corrected, studentized, renormalized])
            })
            .collect::<Result<_>>()?;

        for (k, statistic) in QUANTILE_STATISTICS.iter().enumerate() {
            // Map table order (naive, corrected, studentized, renormalized)
            // onto the per-trial slot for this statistic.
            let slot = match statistic {
                QuantileStatistic::Naive => 0,
                QuantileStatistic::BiasCorrected => 1,
                QuantileStatistic::BiasCorrectedStudentized => 2,
                QuantileStatistic::Renormalized => 3,
            };
            debug_assert_eq!(k, slot);
            let mut values: Vec<f64> =
                per_trial.iter().filter_map(|row| row[slot]).collect();
            values.sort_unstable_by(f64::total_cmp);
            let mut quantiles = [f64::NAN; 9];
            if !values.is_empty() {
                for (i, pct) in QUANTILE_LEVELS_PCT.iter().enumerate() {
                    quantiles[i] = crate::numerics::sorted_quantile(&values, pct / 100.0);
                }
            }
            rows.push(QuantileRow {
                mu,
                statistic: *statistic,
                quantiles,
            });
        }
    }

    Ok(QuantileTable {
        n_sims: config.n_sims,
        rows,
    })
}

// ---------------------------------------------------------------------------
// Trial summaries for the CLI `simulate` command
// ---------------------------------------------------------------------------

/// One simulated stopped trial, summarized.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub mu: f64,
    pub replicate: usize,
    pub t: usize,
    /// `h(Xbar_T)` with `h` the first-coordinate functional.
    pub estimate: f64,
}

/// Simulate `trials` stopped trials at each configured mean and summarize
/// them; used by the CLI's `simulate` command.
pub fn simulate_summaries(config: &ExperimentConfig, trials: usize) -> Result<Vec<TrialSummary>> {
    config.validate()?;
    let ctx = RunContext::from_config(config)?;
    let mut out = Vec::with_capacity(trials * config.mu_list.len());
    for (m_idx, &mu) in config.mu_list.iter().enumerate() {
        let pop = config.population.at(mu)?;
        for r in 0..trials {
            let mut stream = RandomStream::new(config.seed, r as u64)
                .child(m_idx as u64)
                .child(0);
            let trial = run_trial(&ctx.rule, &pop, ctx.map, &mut stream)?;
            out.push(TrialSummary {
                mu,
                replicate: r,
                t: trial.t(),
                estimate: ctx.h.eval(trial.mean()),
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base_config_json() -> String {
        r#"{
            "scenario": {"g": {"name": "quadratic"}, "a": 4.5, "n0": 75, "n1": 15},
            "population": {"variant": "normal"},
            "mu_list": [0.2],
            "methods": ["normal_naive", "normal_bias_corrected"],
            "alpha": 0.05,
            "n_sims": 200,
            "B": 100,
            "seed": 11
        }"#
        .to_string()
    }

    #[test]
    fn config_parses_with_defaults() {
        let config = ExperimentConfig::from_json(&base_config_json()).unwrap();
        assert_eq!(config.scenario.map, ObservationMap::Identity);
        assert_eq!(config.scenario.variance, VarianceMode::KnownUnit);
        assert_eq!(config.b_reps, 100);
        assert!(config.grid.is_none());
        let rule = config.scenario.rule().unwrap();
        assert_eq!(rule.n0(), 75);
        assert_eq!(rule.n1(), 15);
        assert_relative_eq!(rule.a(), 4.5);
    }

    #[test]
    fn config_rejects_unknown_fields() {
        let bad = base_config_json().replace("\"seed\": 11", "\"seed\": 11, \"extra\": 1");
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let bad_nested = base_config_json().replace(
            "\"n1\": 15",
            "\"n1\": 15, \"n2\": 3",
        );
        assert!(ExperimentConfig::from_json(&bad_nested).is_err());
    }

    #[test]
    fn config_validation_enforces_method_compatibility() {
        // t intervals need estimated variance.
        let bad = base_config_json().replace("\"normal_naive\"", "\"t_naive\"");
        assert!(ExperimentConfig::from_json(&bad).is_err());

        // Hybrid/exact/renormalized need scalar known-unit scenarios.
        let studentized = r#"{
            "scenario": {"g": {"name": "studentized"}, "a": 4.5, "n0": 75, "n1": 15,
                         "map": "square_lift", "variance": "estimated"},
            "population": {"variant": "normal"},
            "mu_list": [0.2],
            "methods": ["hybrid"],
            "alpha": 0.05,
            "n_sims": 10,
            "seed": 1
        }"#;
        assert!(ExperimentConfig::from_json(studentized).is_err());

        let ok = studentized.replace("\"hybrid\"", "\"t_naive\", \"boot_bias_corrected\"");
        assert!(ExperimentConfig::from_json(&ok).is_ok());

        let bad_alpha = base_config_json().replace("\"alpha\": 0.05", "\"alpha\": 0.6");
        assert!(ExperimentConfig::from_json(&bad_alpha).is_err());
        let no_sims = base_config_json().replace("\"n_sims\": 200", "\"n_sims\": 0");
        assert!(ExperimentConfig::from_json(&no_sims).is_err());
    }

    #[test]
    fn whole_line_method_never_misses() {
        let json = base_config_json().replace(
            "[\"normal_naive\", \"normal_bias_corrected\"]",
            "[\"whole_line\"]",
        );
        let config = ExperimentConfig::from_json(&json).unwrap();
        let report = run_coverage(&config).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].l_pct, 0.0);
        assert_eq!(report.rows[0].u_pct, 0.0);
        assert_eq!(report.rows[0].l_se, 0.0);
        assert!(report.rows[0].mean_length.is_infinite());
        assert!(report.failures.is_empty());
    }

    #[test]
    fn coverage_ses_match_the_binomial_formula() {
        let config = ExperimentConfig::from_json(&base_config_json()).unwrap();
        let report = run_coverage(&config).unwrap();
        assert!(report.failures.is_empty());
        for row in &report.rows {
            let n = config.n_sims as f64;
            let lp = row.l_pct / 100.0;
            let up = row.u_pct / 100.0;
            assert_relative_eq!(
                row.l_se,
                100.0 * (lp * (1.0 - lp) / n).sqrt(),
                max_relative = 1e-12
            );
            assert_relative_eq!(
                row.u_se,
                100.0 * (up * (1.0 - up) / n).sqrt(),
                max_relative = 1e-12
            );
            assert!(row.mean_t > 15.0 && row.mean_t < 75.0 + 1e-9);
            assert!(row.mean_length > 0.0);
        }
    }

    #[test]
    fn coverage_reports_are_seed_deterministic() {
        let config = ExperimentConfig::from_json(&base_config_json()).unwrap();
        let a = run_coverage(&config).unwrap().to_csv();
        let b = run_coverage(&config).unwrap().to_csv();
        assert_eq!(a, b);

        let other = base_config_json().replace("\"seed\": 11", "\"seed\": 12");
        let config2 = ExperimentConfig::from_json(&other).unwrap();
        let c = run_coverage(&config2).unwrap().to_csv();
        assert_ne!(a, c);
    }

    #[test]
    fn mean_stopping_time_matches_oracle_at_null() {
        // Under the null the boundary is rarely crossed; an independent
        // pre-build simulation (2e6 replicates) put the mean stopping time
        // at 74.215 +/- 0.004. At 10^4 replicates the Monte Carlo standard
        // error is about 0.06, so +/-0.5 is an eight-sigma band.
        let json = base_config_json()
            .replace("\"mu_list\": [0.2]", "\"mu_list\": [0.0]")
            .replace("\"n_sims\": 200", "\"n_sims\": 10000")
            .replace(
                "[\"normal_naive\", \"normal_bias_corrected\"]",
                "[\"normal_naive\"]",
            );
        let config = ExperimentConfig::from_json(&json).unwrap();
        let report = run_coverage(&config).unwrap();
        let mean_t = report.rows[0].mean_t;
        assert!(mean_t > 70.0 && mean_t < 75.0, "mean T {mean_t}");
        assert!((mean_t - 74.215).abs() < 0.5, "mean T {mean_t}");
    }

    #[test]
    fn quantile_table_point_mass_gives_zero_naive_quantiles() {
        let json = r#"{
            "scenario": {"g": {"name": "quadratic"}, "a": 4.5, "n0": 75, "n1": 15},
            "population": {"variant": "normal", "sigma": 0.0},
            "mu_list": [0.5],
            "methods": ["normal_naive"],
            "alpha": 0.05,
            "n_sims": 50,
            "seed": 3
        }"#;
        let config = ExperimentConfig::from_json(json).unwrap();
        let table = run_quantile_table(&config).unwrap();
        let naive = table
            .rows
            .iter()
            .find(|r| r.statistic == QuantileStatistic::Naive)
            .unwrap();
        assert!(naive.quantiles.iter().all(|q| *q == 0.0), "{naive:?}");
        // The zero-variance sample leaves the plug-in statistic undefined.
        let studentized = table
            .rows
            .iter()
            .find(|r| r.statistic == QuantileStatistic::BiasCorrectedStudentized)
            .unwrap();
        assert!(studentized.quantiles.iter().all(|q| q.is_nan()));
    }

    #[test]
    fn quantile_median_of_naive_root_is_near_zero_under_the_null() {
        // The quadratic boundary is even, the null is symmetric, so the
        // naive root's median over many trials sits near zero.
        let json = base_config_json()
            .replace("\"mu_list\": [0.2]", "\"mu_list\": [0.0]")
            .replace("\"n_sims\": 200", "\"n_sims\": 10000");
        let config = ExperimentConfig::from_json(&json).unwrap();
        let table = run_quantile_table(&config).unwrap();
        let naive = table
            .rows
            .iter()
            .find(|r| r.statistic == QuantileStatistic::Naive)
            .unwrap();
        // Median is the fifth of the nine tabulated levels.
        assert!(naive.quantiles[4].abs() < 0.05, "{:?}", naive.quantiles);
        // Rows are monotone across levels.
        for row in &table.rows {
            if row.quantiles.iter().any(|q| q.is_nan()) {
                continue;
            }
            for w in row.quantiles.windows(2) {
                assert!(w[0] <= w[1], "{:?}", row.quantiles);
            }
        }
    }

    #[test]
    fn quantile_table_rejects_non_normal_population() {
        let json = base_config_json().replace(
            "{\"variant\": \"normal\"}",
            "{\"variant\": \"mixture\"}",
        );
        let config = ExperimentConfig::from_json(&json).unwrap();
        assert!(run_quantile_table(&config).is_err());
    }

    #[test]
    fn simulate_summaries_cover_all_means() {
        let json = base_config_json().replace("\"mu_list\": [0.2]", "\"mu_list\": [0.0, 0.5]");
        let config = ExperimentConfig::from_json(&json).unwrap();
        let summaries = simulate_summaries(&config, 5).unwrap();
        assert_eq!(summaries.len(), 10);
        assert!(summaries.iter().all(|s| s.t >= 15 && s.t <= 75));
        let again = simulate_summaries(&config, 5).unwrap();
        assert_eq!(summaries, again);
    }

    #[test]
    fn coverage_failures_are_counted_not_dropped() {
        // A zero-variance population makes every estimated-variance
        // interval fail (zero plug-in deviation), which must surface as
        // failure records rather than an error or silent zeros.
        let json = r#"{
            "scenario": {"g": {"name": "quadratic"}, "a": 4.5, "n0": 75, "n1": 15,
                         "variance": "estimated"},
            "population": {"variant": "normal", "sigma": 0.0},
            "mu_list": [0.5],
            "methods": ["t_naive"],
            "alpha": 0.05,
            "n_sims": 20,
            "seed": 5
        }"#;
        let config = ExperimentConfig::from_json(json).unwrap();
        let report = run_coverage(&config).unwrap();
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].count, 20);
        assert!(report.rows[0].l_pct.is_nan());
    }
}
