//! Confidence-interval constructors for a mean functional after
//! sequential stopping.
//!
//! Seven constructors, in three groups:
//!
//! * closed forms that invert a normal or Student-t approximation of a
//!   root: [`normal_naive_interval`], [`normal_bias_corrected_interval`],
//!   [`normal_renormalized_interval`], [`t_naive_interval`],
//!   [`t_bias_corrected_interval`];
//! * [`bootstrap_interval`], which replaces the normal quantiles by
//!   quantiles of the bootstrap root distribution and inverts the same
//!   affine root;
//! * the grid scans [`hybrid_interval`] and [`exact_interval`], which
//!   simulate parameter-dependent quantiles `u_alpha(theta)` at each grid
//!   node, accept `theta` when the data root falls strictly between them,
//!   and report the hull of the acceptance set with bisection-refined
//!   endpoints.
//!
//! All intervals are equal-tailed at nominal one-sided error `alpha`
//! (confidence `1 - 2 alpha`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{normal_quantile, t_quantile};
use crate::pivots::{
    bias, bias_corrected_pivot, bias_known_scalar, moment_estimates, naive_pivot,
    renormalized_pivot, Cov, SmoothFn, VarianceMode,
};
use crate::resampling::{
    quantile_pair, simulate_root_distribution, ResamplingFamily, RootKind, RootSpec,
};
use crate::sampling::{ObservationMap, RandomStream};
use crate::stopping::{StoppedSample, StoppingRule};

/// Number of bisection steps refining each acceptance-boundary cell.
const REFINE_STEPS: usize = 20;

/// Which constructor produced an interval; doubles as the row label in
/// reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    Exact,
    Hybrid,
    NormalNaive,
    NormalBiasCorrected,
    NormalRenormalized,
    BootNaive,
    BootBiasCorrected,
    TNaive,
    TBiasCorrected,
    /// Coverage diagnostic: the event that the whole confidence line was
    /// reported (degenerate/unbounded acceptance), not a constructor.
    WholeLine,
}

impl MethodTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodTag::Exact => "exact",
            MethodTag::Hybrid => "hybrid",
            MethodTag::NormalNaive => "normal_naive",
            MethodTag::NormalBiasCorrected => "normal_bias_corrected",
            MethodTag::NormalRenormalized => "normal_renormalized",
            MethodTag::BootNaive => "boot_naive",
            MethodTag::BootBiasCorrected => "boot_bias_corrected",
            MethodTag::TNaive => "t_naive",
            MethodTag::TBiasCorrected => "t_bias_corrected",
            MethodTag::WholeLine => "whole_line",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(MethodTag::Exact),
            "hybrid" => Ok(MethodTag::Hybrid),
            "normal_naive" => Ok(MethodTag::NormalNaive),
            "normal_bias_corrected" => Ok(MethodTag::NormalBiasCorrected),
            "normal_renormalized" => Ok(MethodTag::NormalRenormalized),
            "boot_naive" => Ok(MethodTag::BootNaive),
            "boot_bias_corrected" => Ok(MethodTag::BootBiasCorrected),
            "t_naive" => Ok(MethodTag::TNaive),
            "t_bias_corrected" => Ok(MethodTag::TBiasCorrected),
            "whole_line" => Ok(MethodTag::WholeLine),
            other => Err(Error::InvalidConfig(format!(
                "unknown method tag '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for MethodTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Conditions worth surfacing alongside grid-scan endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticFlag {
    /// No grid point was accepted; the reported interval degenerates to
    /// the point estimate.
    EmptyAcceptance,
    /// The acceptance set was not contiguous on the grid; its hull is
    /// reported.
    NonIntervalAcceptance,
    /// The acceptance set touched a grid edge; the true region may extend
    /// beyond the reported endpoint, which is left unrefined on that side.
    GridEdge,
}

/// Evaluation grid for the hybrid and exact scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    center: f64,
    half_width: f64,
    points: usize,
}

impl GridSpec {
    /// `points` must be odd and at least 3 so the center is a node.
    pub fn new(center: f64, half_width: f64, points: usize) -> Result<Self> {
        if !center.is_finite() || !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "grid needs finite center and positive half_width, got ({center}, {half_width})"
            )));
        }
        if points < 3 || points % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "grid needs an odd number of points >= 3, got {points}"
            )));
        }
        Ok(GridSpec {
            center,
            half_width,
            points,
        })
    }

    /// Default scan window: centered on `h(Xbar_T)` with half-width
    /// `8 max(sigma_hat, 1) / sqrt(T)` over 161 points, bounding endpoint
    /// discretization error (before refinement) near `sigma_hat/(10 sqrt(T))`.
    pub fn default_for(
        sample: &StoppedSample,
        h: &SmoothFn,
        variance: VarianceMode,
    ) -> Result<Self> {
        let scale = match variance {
            VarianceMode::KnownUnit => 1.0,
            VarianceMode::Estimated => moment_estimates(sample, h)?.sigma_hat,
        };
        let half_width = 8.0 * scale.max(1.0) / (sample.t() as f64).sqrt();
        GridSpec::new(h.eval(sample.mean()), half_width, 161)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Node `i` (0-based); the middle node is exactly `center`.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.points);
        let mid = (self.points - 1) / 2;
        let step = self.half_width / mid as f64;
        self.center + (i as f64 - mid as f64) * step
    }
}

/// Extra facts about how an interval was produced.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    /// Resampling replicates per quantile estimate, if any were used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    /// Grid the scan ran over, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    /// Estimated bias value entering a corrected interval.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias: Option<f64>,
    /// Scan anomalies; empty for clean runs.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<DiagnosticFlag>,
}

/// An equal-tailed confidence interval with provenance.
#[derive(Debug, Clone, Serialize)]
pub struct IntervalResult {
    pub lower: f64,
    pub upper: f64,
    pub method: MethodTag,
    /// Nominal one-sided error; the interval targets confidence
    /// `1 - 2 alpha`.
    pub alpha: f64,
    pub diagnostics: Diagnostics,
}

impl IntervalResult {
    fn closed_form(lower: f64, upper: f64, method: MethodTag, alpha: f64, bias: Option<f64>) -> Self {
        debug_assert!(lower <= upper);
        IntervalResult {
            lower,
            upper,
            method,
            alpha,
            diagnostics: Diagnostics {
                bias,
                ..Diagnostics::default()
            },
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lower <= theta && theta <= self.upper
    }
}

fn check_alpha_closed(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "one-sided error must lie in (0, 0.5], got {alpha}"
        )))
    }
}

fn check_alpha_resampled(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "one-sided error must lie in (0, 0.5), got {alpha}"
        )))
    }
}

/// Scale and (if estimated) covariance for the closed-form intervals.
fn scale_and_cov(
    sample: &StoppedSample,
    h: &SmoothFn,
    variance: VarianceMode,
) -> Result<(f64, Option<Cov>)> {
    match variance {
        VarianceMode::KnownUnit => Ok((1.0, None)),
        VarianceMode::Estimated => {
            let est = moment_estimates(sample, h)?;
            if est.sigma_hat > 0.0 {
                Ok((est.sigma_hat, Some(est.cov)))
            } else {
                Err(Error::ZeroEstimatedVariance)
            }
        }
    }
}

fn bias_for(
    sample: &StoppedSample,
    rule: &StoppingRule,
    h: &SmoothFn,
    variance: VarianceMode,
    cov: Option<&Cov>,
) -> f64 {
    match variance {
        VarianceMode::KnownUnit => {
            if sample.d() == 1 && matches!(h, SmoothFn::Coordinate(0)) {
                bias_known_scalar(rule, sample.mean()[0])
            } else {
                bias(rule, sample.mean(), &Cov::identity(sample.d()), h)
            }
        }
        VarianceMode::Estimated => bias(
            rule,
            sample.mean(),
            cov.expect("estimated mode supplies a covariance"),
            h,
        ),
    }
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// Normal interval from the naive root:
/// `(h(Xbar) - z_{1-alpha} sigma/sqrt(T), h(Xbar) - z_alpha sigma/sqrt(T))`.
pub fn normal_naive_interval(
    sample: &StoppedSample,
    h: &SmoothFn,
    alpha: f64,
    variance: VarianceMode,
) -> Result<IntervalResult> {
    check_alpha_closed(alpha)?;
    h.check_dim(sample.d())?;
    let (sigma, _) = scale_and_cov(sample, h, variance)?;
    let center = h.eval(sample.mean());
    let se = sigma / (sample.t() as f64).sqrt();
    let z_hi = normal_quantile(1.0 - alpha)?;
    let z_lo = normal_quantile(alpha)?;
    Ok(IntervalResult::closed_form(
        center - z_hi * se,
        center - z_lo * se,
        MethodTag::NormalNaive,
        alpha,
        None,
    ))
}

/// Normal interval from the bias-corrected root: the naive interval with
/// both endpoints shifted by `-b_hat / T`.
pub fn normal_bias_corrected_interval(
    sample: &StoppedSample,
    rule: &StoppingRule,
    h: &SmoothFn,
    alpha: f64,
    variance: VarianceMode,
) -> Result<IntervalResult> {
    check_alpha_closed(alpha)?;
    h.check_dim(sample.d())?;
    if sample.d() != rule.d() {
        return Err(Error::DimensionMismatch(format!(
            "sample dimension {} != rule dimension {}",
            sample.d(),
            rule.d()
        )));
    }
    let (sigma, cov) = scale_and_cov(sample, h, variance)?;
    let b_hat = bias_for(sample, rule, h, variance, cov.as_ref());
    let t = sample.t() as f64;
    let center = h.eval(sample.mean());
    let se = sigma / t.sqrt();
    let shift = b_hat / t;
    let z_hi = normal_quantile(1.0 - alpha)?;
    let z_lo = normal_quantile(alpha)?;
    Ok(IntervalResult::closed_form(
        center - z_hi * se - shift,
        center - z_lo * se - shift,
        MethodTag::NormalBiasCorrected,
        alpha,
        Some(b_hat),
    ))
}

/// Normal interval from the renormalized root (scalar mean, known unit
/// variance): solve `R(mu) = z_q` for `mu`, which is affine because the
/// bias and variance factors depend only on the data:
///
/// ```text
/// mu_q = Xbar - [z_q (1 + b^2/(2T)) + b/sqrt(T)] / sqrt(T)
/// ```
pub fn normal_renormalized_interval(
    sample: &StoppedSample,
    rule: &StoppingRule,
    alpha: f64,
) -> Result<IntervalResult> {
    check_alpha_closed(alpha)?;
    if sample.d() != 1 || rule.d() != 1 {
        return Err(Error::DimensionMismatch(
            "renormalized intervals are defined for scalar means only".into(),
        ));
    }
    let t = sample.t() as f64;
    let xbar = sample.mean()[0];
    let b = bias_known_scalar(rule, xbar);
    let stretch = 1.0 + b * b / (2.0 * t);
    let shift = b / t.sqrt();
    let z_hi = normal_quantile(1.0 - alpha)?;
    let z_lo = normal_quantile(alpha)?;
    Ok(IntervalResult::closed_form(
        xbar - (z_hi * stretch + shift) / t.sqrt(),
        xbar - (z_lo * stretch + shift) / t.sqrt(),
        MethodTag::NormalRenormalized,
        alpha,
        Some(b),
    ))
}

/// Student-t interval from the naive root: the normal interval with
/// `z`-quantiles replaced by t-quantiles with `T` degrees of freedom.
/// Estimated-variance mode only (a t correction with known variance is a
/// contradiction in terms).
pub fn t_naive_interval(
    sample: &StoppedSample,
    h: &SmoothFn,
    alpha: f64,
) -> Result<IntervalResult> {
    check_alpha_closed(alpha)?;
    h.check_dim(sample.d())?;
    let (sigma, _) = scale_and_cov(sample, h, VarianceMode::Estimated)?;
    let t = sample.t() as f64;
    let center = h.eval(sample.mean());
    let se = sigma / t.sqrt();
    let q_hi = t_quantile(1.0 - alpha, t)?;
    let q_lo = t_quantile(alpha, t)?;
    Ok(IntervalResult::closed_form(
        center - q_hi * se,
        center - q_lo * se,
        MethodTag::TNaive,
        alpha,
        None,
    ))
}

/// Student-t interval from the bias-corrected root: [`t_naive_interval`]
/// shifted by `-b_hat / T` with the covariance-estimated bias.
pub fn t_bias_corrected_interval(
    sample: &StoppedSample,
    rule: &StoppingRule,
    h: &SmoothFn,
    alpha: f64,
) -> Result<IntervalResult> {
    check_alpha_closed(alpha)?;
    h.check_dim(sample.d())?;
    if sample.d() != rule.d() {
        return Err(Error::DimensionMismatch(format!(
            "sample dimension {} != rule dimension {}",
            sample.d(),
            rule.d()
        )));
    }
    let (sigma, cov) = scale_and_cov(sample, h, VarianceMode::Estimated)?;
    let b_hat = bias_for(sample, rule, h, VarianceMode::Estimated, cov.as_ref());
    let t = sample.t() as f64;
    let center = h.eval(sample.mean());
    let se = sigma / t.sqrt();
    let shift = b_hat / t;
    let q_hi = t_quantile(1.0 - alpha, t)?;
    let q_lo = t_quantile(alpha, t)?;
    Ok(IntervalResult::closed_form(
        center - q_hi * se - shift,
        center - q_lo * se - shift,
        MethodTag::TBiasCorrected,
        alpha,
        Some(b_hat),
    ))
}

// ---------------------------------------------------------------------------
// Bootstrap quantile inversion
// ---------------------------------------------------------------------------

/// Bootstrap interval: simulate the root under resampling from the
/// empirical distribution of the stopped scalars, then invert the affine
/// root with the bootstrap quantiles in place of normal ones:
///
/// ```text
/// (h(Xbar) - u*_{1-alpha} sigma/sqrt(T) - c,  h(Xbar) - u*_alpha sigma/sqrt(T) - c)
/// ```
///
/// with `c = b_hat / T` for the bias-corrected root and `0` for the naive
/// root. Renormalized roots are not supported here.
pub fn bootstrap_interval(
    sample: &StoppedSample,
    spec: &RootSpec,
    alpha: f64,
    b_reps: usize,
    stream: &RandomStream,
) -> Result<IntervalResult> {
    check_alpha_resampled(alpha)?;
    if spec.kind() == RootKind::Renormalized {
        return Err(Error::InvalidConfig(
            "bootstrap inversion covers the naive and bias-corrected roots only".into(),
        ));
    }
    if sample.d() != spec.rule().d() {
        return Err(Error::DimensionMismatch(format!(
            "sample dimension {} != rule dimension {}",
            sample.d(),
            spec.rule().d()
        )));
    }
    let family = ResamplingFamily::bootstrap(sample.scalars())?;
    let roots = simulate_root_distribution(&family, 0.0, spec, b_reps, stream)?;
    let (u_lo, u_hi) = quantile_pair(&roots, alpha)?;

    let (sigma, cov) = scale_and_cov(sample, spec.h(), spec.variance())?;
    let (shift, b_hat) = match spec.kind() {
        RootKind::Naive => (0.0, None),
        RootKind::BiasCorrected => {
            let b = bias_for(sample, spec.rule(), spec.h(), spec.variance(), cov.as_ref());
            (b / sample.t() as f64, Some(b))
        }
        RootKind::Renormalized => unreachable!("rejected above"),
    };
    let center = spec.h().eval(sample.mean());
    let se = sigma / (sample.t() as f64).sqrt();
    let method = match spec.kind() {
        RootKind::Naive => MethodTag::BootNaive,
        _ => MethodTag::BootBiasCorrected,
    };
    Ok(IntervalResult {
        lower: center - u_hi * se - shift,
        upper: center - u_lo * se - shift,
        method,
        alpha,
        diagnostics: Diagnostics {
            replicates: Some(b_reps),
            bias: b_hat,
            ..Diagnostics::default()
        },
    })
}

// ---------------------------------------------------------------------------
// Grid scans: hybrid and exact
// ---------------------------------------------------------------------------

/// The data root `r(theta; T, X_1..X_T)` for membership tests.
fn eval_data_root(sample: &StoppedSample, spec: &RootSpec, theta: f64) -> Result<f64> {
    match spec.kind() {
        RootKind::Naive => naive_pivot(sample, spec.h(), theta, spec.variance()),
        RootKind::BiasCorrected => {
            bias_corrected_pivot(sample, spec.rule(), spec.h(), theta, spec.variance())
        }
        RootKind::Renormalized => renormalized_pivot(sample, spec.rule(), theta),
    }
}

/// One acceptance test: simulate the quantile pair at `theta`, accept when
/// the data root lies strictly between them (ties reject).
fn accepts(
    sample: &StoppedSample,
    spec: &RootSpec,
    family: &ResamplingFamily,
    theta: f64,
    alpha: f64,
    b_reps: usize,
    stream: &RandomStream,
) -> Result<bool> {
    let roots = simulate_root_distribution(family, theta, spec, b_reps, stream)?;
    let (u_lo, u_hi) = quantile_pair(&roots, alpha)?;
    let r = eval_data_root(sample, spec, theta)?;
    Ok(u_lo < r && r < u_hi)
}

/// Shared scan: test every grid node, report the hull of the acceptance
/// set, then bisect the two boundary cells with fresh simulations.
///
/// Stream discipline: node `i` uses `stream.child(i)`; the lower-edge
/// refinement steps use children `points .. points + 20` and the upper
/// edge `points + 20 .. points + 40`.
fn grid_scan(
    sample: &StoppedSample,
    spec: &RootSpec,
    family: &ResamplingFamily,
    alpha: f64,
    b_reps: usize,
    grid: &GridSpec,
    stream: &RandomStream,
    method: MethodTag,
) -> Result<IntervalResult> {
    check_alpha_resampled(alpha)?;
    if sample.d() != spec.rule().d() {
        return Err(Error::DimensionMismatch(format!(
            "sample dimension {} != rule dimension {}",
            sample.d(),
            spec.rule().d()
        )));
    }
    let n = grid.points();
    let mut accepted: Vec<usize> = Vec::new();
    for i in 0..n {
        if accepts(
            sample,
            spec,
            family,
            grid.node(i),
            alpha,
            b_reps,
            &stream.child(i as u64),
        )? {
            accepted.push(i);
        }
    }

    let mut flags = Vec::new();
    if accepted.is_empty() {
        let center = spec.h().eval(sample.mean());
        flags.push(DiagnosticFlag::EmptyAcceptance);
        return Ok(IntervalResult {
            lower: center,
            upper: center,
            method,
            alpha,
            diagnostics: Diagnostics {
                replicates: Some(b_reps),
                grid: Some(*grid),
                flags,
                ..Diagnostics::default()
            },
        });
    }

    let lo_i = accepted[0];
    let hi_i = *accepted.last().expect("nonempty");
    if accepted.len() != hi_i - lo_i + 1 {
        flags.push(DiagnosticFlag::NonIntervalAcceptance);
    }
    if lo_i == 0 || hi_i == n - 1 {
        flags.push(DiagnosticFlag::GridEdge);
    }

    // Refine the lower boundary within (node(lo_i - 1), node(lo_i)].
    let mut lower = grid.node(lo_i);
    if lo_i > 0 {
        let mut reject_at = grid.node(lo_i - 1);
        for step in 0..REFINE_STEPS {
            let mid = 0.5 * (reject_at + lower);
            let s = stream.child((n + step) as u64);
            if accepts(sample, spec, family, mid, alpha, b_reps, &s)? {
                lower = mid;
            } else {
                reject_at = mid;
            }
        }
    }

    // Refine the upper boundary within [node(hi_i), node(hi_i + 1)).
    let mut upper = grid.node(hi_i);
    if hi_i < n - 1 {
        let mut reject_at = grid.node(hi_i + 1);
        for step in 0..REFINE_STEPS {
            let mid = 0.5 * (upper + reject_at);
            let s = stream.child((n + REFINE_STEPS + step) as u64);
            if accepts(sample, spec, family, mid, alpha, b_reps, &s)? {
                upper = mid;
            } else {
                reject_at = mid;
            }
        }
    }

    Ok(IntervalResult {
        lower,
        upper,
        method,
        alpha,
        diagnostics: Diagnostics {
            replicates: Some(b_reps),
            grid: Some(*grid),
            flags,
            ..Diagnostics::default()
        },
    })
}

/// Hybrid interval: acceptance scan against the shifted empirical family
/// built from the sample's centered residuals. Known-unit-variance roots
/// only (the shifted-residual recipe assumes unit scale).
pub fn hybrid_interval(
    sample: &StoppedSample,
    spec: &RootSpec,
    alpha: f64,
    b_reps: usize,
    grid: &GridSpec,
    stream: &RandomStream,
) -> Result<IntervalResult> {
    if spec.variance() != VarianceMode::KnownUnit {
        return Err(Error::InvalidConfig(
            "the hybrid scan is defined for known-unit-variance roots".into(),
        ));
    }
    let family = ResamplingFamily::hybrid_shift(sample.scalars())?;
    grid_scan(
        sample,
        spec,
        &family,
        alpha,
        b_reps,
        grid,
        stream,
        MethodTag::Hybrid,
    )
}

/// Exact interval: acceptance scan against a fully specified parametric
/// family, with the root pinned to `sqrt(T)(Xbar_T - theta)` (scalar mean,
/// known unit variance) regardless of how the data arose.
pub fn exact_interval(
    sample: &StoppedSample,
    rule: &StoppingRule,
    family: &ResamplingFamily,
    alpha: f64,
    b_reps: usize,
    grid: &GridSpec,
    stream: &RandomStream,
) -> Result<IntervalResult> {
    if !matches!(family, ResamplingFamily::Parametric { .. }) {
        return Err(Error::InvalidConfig(
            "the exact method needs a parametric family".into(),
        ));
    }
    let spec = RootSpec::new(
        RootKind::Naive,
        rule.clone(),
        ObservationMap::Identity,
        SmoothFn::identity(),
        VarianceMode::KnownUnit,
    )?;
    grid_scan(
        sample,
        &spec,
        family,
        alpha,
        b_reps,
        grid,
        stream,
        MethodTag::Exact,
    )
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{make_stream, Population};
    use approx::assert_relative_eq;

    fn rst_rule() -> StoppingRule {
        StoppingRule::repeated_significance(3.0, 15, 75).unwrap()
    }

    fn sample_mean_half() -> StoppedSample {
        StoppedSample::from_scalars(vec![0.5; 25], ObservationMap::Identity).unwrap()
    }

    fn h_id() -> SmoothFn {
        SmoothFn::identity()
    }

    #[test]
    fn normal_naive_hand_values() {
        let s = sample_mean_half();
        let r = normal_naive_interval(&s, &h_id(), 0.05, VarianceMode::KnownUnit).unwrap();
        let z = normal_quantile(0.95).unwrap();
        assert_relative_eq!(r.lower, 0.5 - z / 5.0, max_relative = 1e-12);
        assert_relative_eq!(r.upper, 0.5 + z / 5.0, max_relative = 1e-12);
        // Three-decimal hand value computed with the tabulated z = 1.645.
        assert!((r.lower - 0.171).abs() < 5e-4);
        assert!((r.upper - 0.829).abs() < 5e-4);
        assert_eq!(r.method, MethodTag::NormalNaive);

        // alpha = 0.5: both endpoints collapse to the estimate.
        let r = normal_naive_interval(&s, &h_id(), 0.5, VarianceMode::KnownUnit).unwrap();
        assert_eq!(r.lower, 0.5);
        assert_eq!(r.upper, 0.5);
    }

    #[test]
    fn normal_naive_width_is_linear_in_scale() {
        let a = StoppedSample::from_scalars(vec![0.0, 2.0], ObservationMap::Identity).unwrap();
        let b = StoppedSample::from_scalars(vec![0.0, 4.0], ObservationMap::Identity).unwrap();
        let ia = normal_naive_interval(&a, &h_id(), 0.05, VarianceMode::Estimated).unwrap();
        let ib = normal_naive_interval(&b, &h_id(), 0.05, VarianceMode::Estimated).unwrap();
        assert_relative_eq!(ib.width(), 2.0 * ia.width(), max_relative = 1e-12);
    }

    #[test]
    fn bias_corrected_shifts_by_b_over_t() {
        let s = sample_mean_half();
        let rule = rst_rule();
        let naive = normal_naive_interval(&s, &h_id(), 0.05, VarianceMode::KnownUnit).unwrap();
        let corr =
            normal_bias_corrected_interval(&s, &rule, &h_id(), 0.05, VarianceMode::KnownUnit)
                .unwrap();
        // b = 2 at Xbar = 0.5, so the shift is 2/25 = 0.08, downward.
        assert_relative_eq!(corr.lower, naive.lower - 0.08, max_relative = 1e-12);
        assert_relative_eq!(corr.upper, naive.upper - 0.08, max_relative = 1e-12);
        assert!(corr.upper < naive.upper);
        assert_eq!(corr.diagnostics.bias, Some(2.0));

        // Clamped mean: b = 0, intervals coincide.
        let s1 = StoppedSample::from_scalars(vec![1.0; 15], ObservationMap::Identity).unwrap();
        let n1 = normal_naive_interval(&s1, &h_id(), 0.05, VarianceMode::KnownUnit).unwrap();
        let c1 =
            normal_bias_corrected_interval(&s1, &rule, &h_id(), 0.05, VarianceMode::KnownUnit)
                .unwrap();
        assert_eq!(n1.lower, c1.lower);
        assert_eq!(n1.upper, c1.upper);
    }

    #[test]
    fn renormalized_hand_values() {
        let s = sample_mean_half();
        let rule = rst_rule();
        let r = normal_renormalized_interval(&s, &rule, 0.05).unwrap();
        let z = normal_quantile(0.95).unwrap();
        assert_relative_eq!(r.lower, 0.5 - (z * 1.08 + 0.4) / 5.0, max_relative = 1e-12);
        assert_relative_eq!(r.upper, 0.5 - (-z * 1.08 + 0.4) / 5.0, max_relative = 1e-12);
        // Hand values computed with the tabulated z = 1.645.
        assert!((r.lower - 0.06468).abs() < 5e-5, "lower {}", r.lower);
        assert!((r.upper - 0.77532).abs() < 5e-5, "upper {}", r.upper);

        // Width inflated by exactly the renormalization factor.
        let naive = normal_naive_interval(&s, &h_id(), 0.05, VarianceMode::KnownUnit).unwrap();
        assert_relative_eq!(r.width(), naive.width() * 1.08, max_relative = 1e-12);

        // Zero bias: renormalized equals naive exactly.
        let s1 = StoppedSample::from_scalars(vec![1.0; 15], ObservationMap::Identity).unwrap();
        let r1 = normal_renormalized_interval(&s1, &rule, 0.05).unwrap();
        let n1 = normal_naive_interval(&s1, &h_id(), 0.05, VarianceMode::KnownUnit).unwrap();
        assert_eq!(r1.lower, n1.lower);
        assert_eq!(r1.upper, n1.upper);
    }

    #[test]
    fn t_intervals_widen_then_converge() {
        let scalars: Vec<f64> = (0..16).map(|i| if i % 2 == 0 { 0.0 } else { 1.0 }).collect();
        let s = StoppedSample::from_scalars(scalars, ObservationMap::Identity).unwrap();
        let z = normal_naive_interval(&s, &h_id(), 0.05, VarianceMode::Estimated).unwrap();
        let t = t_naive_interval(&s, &h_id(), 0.05).unwrap();
        assert!(t.lower < z.lower && z.upper < t.upper, "t must be wider");

        // Large T: the t interval collapses onto the normal one.
        let big: Vec<f64> = (0..1_000_000)
            .map(|i| if i % 2 == 0 { 0.0 } else { 1.0 })
            .collect();
        let s = StoppedSample::from_scalars(big, ObservationMap::Identity).unwrap();
        let z = normal_naive_interval(&s, &h_id(), 0.05, VarianceMode::Estimated).unwrap();
        let t = t_naive_interval(&s, &h_id(), 0.05).unwrap();
        assert!((t.lower - z.lower).abs() < 1e-3);
        assert!((t.upper - z.upper).abs() < 1e-3);
    }

    #[test]
    fn t_corrected_equals_t_naive_at_zero_bias() {
        // Mean far above the clamp band: gradient term zero, h linear.
        let rule = rst_rule();
        let scalars: Vec<f64> = (0..20).map(|i| 1.5 + 0.01 * (i % 3) as f64).collect();
        let s = StoppedSample::from_scalars(scalars, ObservationMap::Identity).unwrap();
        let naive = t_naive_interval(&s, &h_id(), 0.05).unwrap();
        let corr = t_bias_corrected_interval(&s, &rule, &h_id(), 0.05).unwrap();
        assert_eq!(naive.lower, corr.lower);
        assert_eq!(naive.upper, corr.upper);
        assert_eq!(corr.diagnostics.bias, Some(0.0));
    }

    #[test]
    fn bootstrap_single_atom_collapses() {
        let s = StoppedSample::from_scalars(vec![2.5; 20], ObservationMap::Identity).unwrap();
        let spec = RootSpec::new(
            RootKind::Naive,
            rst_rule(),
            ObservationMap::Identity,
            h_id(),
            VarianceMode::KnownUnit,
        )
        .unwrap();
        let r = bootstrap_interval(&s, &spec, 0.05, 200, &make_stream(3, 0)).unwrap();
        assert_eq!(r.lower, 2.5);
        assert_eq!(r.upper, 2.5);
        assert_eq!(r.method, MethodTag::BootNaive);
        assert_eq!(r.diagnostics.replicates, Some(200));
    }

    #[test]
    fn bootstrap_rejects_renormalized_roots() {
        let s = sample_mean_half();
        let spec = RootSpec::new(
            RootKind::Renormalized,
            rst_rule(),
            ObservationMap::Identity,
            h_id(),
            VarianceMode::KnownUnit,
        )
        .unwrap();
        assert!(bootstrap_interval(&s, &spec, 0.05, 50, &make_stream(3, 0)).is_err());
    }

    #[test]
    fn inversion_agrees_with_membership_on_synthetic_cases() {
        // The closed-form bootstrap inversion must accept exactly the
        // parameters whose root lies strictly between the quantiles. Checks
        // both root kinds over randomized synthetic cases by comparing the
        // inequality test against the interval endpoints.
        let rule = rst_rule();
        let h = h_id();
        let mut stream = make_stream(99, 0);
        let mut checked = 0usize;
        while checked < 10_000 {
            let t = 15 + stream.next_index(61); // 15..=75
            let xbar = 2.0 * stream.next_uniform() - 1.0;
            let s = StoppedSample::from_scalars(vec![xbar; t], ObservationMap::Identity).unwrap();
            // A plausible quantile pair: u_lo < u_hi.
            let u_lo = 3.0 * stream.next_uniform() - 1.5;
            let u_hi = u_lo + 0.2 + 2.0 * stream.next_uniform();
            for kind in [RootKind::Naive, RootKind::BiasCorrected] {
                // Closed-form endpoints per the inversion formula, with the
                // same scalar bias evaluation the pivot itself uses.
                let b_hat = match kind {
                    RootKind::Naive => 0.0,
                    _ => bias_known_scalar(&rule, xbar),
                };
                let tf = t as f64;
                let lower = xbar - u_hi / tf.sqrt() - b_hat / tf;
                let upper = xbar - u_lo / tf.sqrt() - b_hat / tf;
                // Membership at probe points: inside accepts, outside rejects.
                let width = upper - lower;
                for (theta, want) in [
                    (0.5 * (lower + upper), true),
                    (lower - 0.01 * width.max(1e-3), false),
                    (upper + 0.01 * width.max(1e-3), false),
                ] {
                    let r = match kind {
                        RootKind::Naive => {
                            naive_pivot(&s, &h, theta, VarianceMode::KnownUnit).unwrap()
                        }
                        _ => bias_corrected_pivot(&s, &rule, &h, theta, VarianceMode::KnownUnit)
                            .unwrap(),
                    };
                    let accepted = u_lo < r && r < u_hi;
                    assert_eq!(accepted, want, "kind {kind:?} theta {theta} t {t}");
                    checked += 1;
                }
            }
        }
    }

    #[test]
    fn grid_spec_validation_and_nodes() {
        assert!(GridSpec::new(0.0, 1.0, 4).is_err());
        assert!(GridSpec::new(0.0, 1.0, 1).is_err());
        assert!(GridSpec::new(0.0, 0.0, 5).is_err());
        assert!(GridSpec::new(f64::NAN, 1.0, 5).is_err());

        let g = GridSpec::new(0.3, 1.0, 5).unwrap();
        assert_eq!(g.node(2), 0.3);
        assert_relative_eq!(g.node(0), -0.7, max_relative = 1e-12);
        assert_relative_eq!(g.node(4), 1.3, max_relative = 1e-12);

        let s = sample_mean_half();
        let g = GridSpec::default_for(&s, &h_id(), VarianceMode::KnownUnit).unwrap();
        assert_eq!(g.points(), 161);
        assert_eq!(g.center(), 0.5);
        assert_relative_eq!(g.half_width(), 8.0 / 5.0, max_relative = 1e-12);
    }

    #[test]
    fn hybrid_accepts_the_center_for_symmetric_residuals() {
        let s = StoppedSample::from_scalars(vec![-1.0, 1.0], ObservationMap::Identity).unwrap();
        let spec = RootSpec::new(
            RootKind::Naive,
            rst_rule(),
            ObservationMap::Identity,
            h_id(),
            VarianceMode::KnownUnit,
        )
        .unwrap();
        let grid = GridSpec::new(0.0, 0.5, 21).unwrap();
        let r = hybrid_interval(&s, &spec, 0.05, 100, &grid, &make_stream(8, 0)).unwrap();
        assert!(r.diagnostics.flags.iter().all(|f| *f != DiagnosticFlag::EmptyAcceptance));
        assert!(r.contains(0.0), "{r:?}");
        assert_eq!(r.method, MethodTag::Hybrid);
    }

    #[test]
    fn hybrid_requires_known_unit_variance() {
        let s = sample_mean_half();
        let spec = RootSpec::new(
            RootKind::Naive,
            rst_rule(),
            ObservationMap::Identity,
            h_id(),
            VarianceMode::Estimated,
        )
        .unwrap();
        let grid = GridSpec::new(0.5, 0.5, 5).unwrap();
        assert!(hybrid_interval(&s, &spec, 0.05, 50, &grid, &make_stream(8, 0)).is_err());
    }

    #[test]
    fn wide_residuals_accept_the_whole_grid() {
        // Huge residual spread makes the resampled quantiles so wide that
        // every node is accepted: the hull is the whole grid, flagged as
        // touching the edge.
        let s =
            StoppedSample::from_scalars(vec![-1000.0, 1000.0], ObservationMap::Identity).unwrap();
        let spec = RootSpec::new(
            RootKind::Naive,
            rst_rule(),
            ObservationMap::Identity,
            h_id(),
            VarianceMode::KnownUnit,
        )
        .unwrap();
        let grid = GridSpec::new(0.0, 1.0, 5).unwrap();
        let r = hybrid_interval(&s, &spec, 0.05, 64, &grid, &make_stream(8, 1)).unwrap();
        assert_eq!(r.lower, grid.node(0));
        assert_eq!(r.upper, grid.node(4));
        assert!(r.diagnostics.flags.contains(&DiagnosticFlag::GridEdge));
    }

    #[test]
    fn exact_point_mass_family_degenerates_with_flag() {
        // A point-mass family gives a single-atom root distribution, so the
        // strict membership test rejects everywhere (ties reject) and the
        // interval collapses to the estimate, flagged.
        let s = sample_mean_half();
        let family =
            ResamplingFamily::parametric(|theta| Population::normal(theta, 0.0).unwrap());
        let grid = GridSpec::new(0.5, 0.4, 9).unwrap();
        let r = exact_interval(&s, &rst_rule(), &family, 0.05, 50, &grid, &make_stream(14, 0))
            .unwrap();
        assert_eq!(r.lower, 0.5);
        assert_eq!(r.upper, 0.5);
        assert!(r
            .diagnostics
            .flags
            .contains(&DiagnosticFlag::EmptyAcceptance));
    }

    #[test]
    fn exact_requires_parametric_family() {
        let s = sample_mean_half();
        let boot = ResamplingFamily::bootstrap(&[1.0, 2.0]).unwrap();
        let grid = GridSpec::new(0.5, 0.4, 9).unwrap();
        assert!(
            exact_interval(&s, &rst_rule(), &boot, 0.05, 50, &grid, &make_stream(14, 0)).is_err()
        );
    }

    #[test]
    fn exact_interval_covers_a_normal_draw_sensibly() {
        // End-to-end sanity: a genuine stopped N(0.3, 1) sample, exact scan
        // under the N(theta, 1) family. The interval must contain the
        // point estimate and have width of order sigma/sqrt(T).
        let rule = rst_rule();
        let pop = Population::normal(0.3, 1.0).unwrap();
        let mut s = make_stream(41, 7);
        let trial = crate::stopping::run_trial(&rule, &pop, ObservationMap::Identity, &mut s)
            .unwrap();
        let family = ResamplingFamily::parametric_normal();
        let grid = GridSpec::default_for(&trial, &h_id(), VarianceMode::KnownUnit).unwrap();
        let r = exact_interval(&trial, &rule, &family, 0.05, 400, &grid, &make_stream(42, 0))
            .unwrap();
        let xbar = trial.mean()[0];
        assert!(r.contains(xbar) || !r.diagnostics.flags.is_empty());
        assert!(r.lower < r.upper);
        let tf = trial.t() as f64;
        assert!(r.width() > 1.0 / tf.sqrt() && r.width() < 16.0 / tf.sqrt(), "{r:?}");
    }

    #[test]
    fn intervals_nest_in_alpha() {
        // Same data, same streams: a stricter alpha yields a wider
        // interval for every constructor.
        let rule = rst_rule();
        let pop = Population::normal(0.4, 1.0).unwrap();
        let mut s = make_stream(51, 2);
        let trial = crate::stopping::run_trial(&rule, &pop, ObservationMap::Identity, &mut s)
            .unwrap();
        let spec = RootSpec::new(
            RootKind::Naive,
            rule.clone(),
            ObservationMap::Identity,
            h_id(),
            VarianceMode::KnownUnit,
        )
        .unwrap();
        let grid = GridSpec::default_for(&trial, &h_id(), VarianceMode::KnownUnit).unwrap();
        let family = ResamplingFamily::parametric_normal();
        let alphas = [0.01, 0.05, 0.1];
        let build: Vec<Box<dyn Fn(f64) -> IntervalResult + '_>> = vec![
            Box::new(|a| {
                normal_naive_interval(&trial, &h_id(), a, VarianceMode::KnownUnit).unwrap()
            }),
            Box::new(|a| {
                normal_bias_corrected_interval(&trial, &rule, &h_id(), a, VarianceMode::KnownUnit)
                    .unwrap()
            }),
            Box::new(|a| normal_renormalized_interval(&trial, &rule, a).unwrap()),
            Box::new(|a| {
                bootstrap_interval(&trial, &spec, a, 300, &make_stream(52, 0)).unwrap()
            }),
            Box::new(|a| {
                hybrid_interval(&trial, &spec, a, 200, &grid, &make_stream(53, 0)).unwrap()
            }),
            Box::new(|a| {
                exact_interval(&trial, &rule, &family, a, 200, &grid, &make_stream(54, 0))
                    .unwrap()
            }),
        ];
        for f in &build {
            let ivs: Vec<IntervalResult> = alphas.iter().map(|&a| f(a)).collect();
            for w in ivs.windows(2) {
                assert!(
                    w[0].lower <= w[1].lower && w[1].upper <= w[0].upper,
                    "nesting violated: {:?} then {:?}",
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn grid_methods_are_deterministic() {
        let rule = rst_rule();
        let pop = Population::mixture(0.2);
        let mut s = make_stream(61, 5);
        let trial = crate::stopping::run_trial(&rule, &pop, ObservationMap::Identity, &mut s)
            .unwrap();
        let spec = RootSpec::new(
            RootKind::Naive,
            rule.clone(),
            ObservationMap::Identity,
            h_id(),
            VarianceMode::KnownUnit,
        )
        .unwrap();
        let grid = GridSpec::new(trial.mean()[0], 1.0, 31).unwrap();
        let a = hybrid_interval(&trial, &spec, 0.05, 128, &grid, &make_stream(62, 0)).unwrap();
        let b = hybrid_interval(&trial, &spec, 0.05, 128, &grid, &make_stream(62, 0)).unwrap();
        assert_eq!(a.lower.to_bits(), b.lower.to_bits());
        assert_eq!(a.upper.to_bits(), b.upper.to_bits());
    }

    #[test]
    fn method_tags_serialize_to_their_names() {
        for tag in [
            MethodTag::Exact,
            MethodTag::Hybrid,
            MethodTag::NormalNaive,
            MethodTag::NormalBiasCorrected,
            MethodTag::NormalRenormalized,
            MethodTag::BootNaive,
            MethodTag::BootBiasCorrected,
            MethodTag::TNaive,
            MethodTag::TBiasCorrected,
            MethodTag::WholeLine,
        ] {
            let json = serde_json::to_string(&tag).unwrap();
            assert_eq!(json, format!("\"{}\"", tag.as_str()));
            assert_eq!(MethodTag::parse(tag.as_str()).unwrap(), tag);
        }
        assert!(MethodTag::parse("bogus").is_err());
    }
}
