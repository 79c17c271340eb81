//! Resampled distributions of roots under sequential stopping.
//!
//! Fixed-sample resampling is not enough here: the stopping rule couples
//! the sample size to the data, so every resample re-runs the rule from
//! scratch — draw, lift, stop — and only then evaluates the root. Three
//! families cover the methods downstream:
//!
//! * [`ResamplingFamily::Bootstrap`] — resample the empirical distribution
//!   of the observed scalars; the root is evaluated at the original
//!   estimate, giving the classical bootstrap root distribution.
//! * [`ResamplingFamily::HybridShift`] — a one-parameter family of shifted
//!   empirical distributions built from the centered residuals
//!   `X_i - Xbar_T`, so the resampled mean equals any requested `theta`.
//! * [`ResamplingFamily::Parametric`] — a fully specified family
//!   `theta -> Population`, used by the exact method.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::sorted_quantile;
use crate::pivots::{
    bias_corrected_pivot, bias_known_scalar, naive_pivot, renormalized_pivot, SmoothFn,
    VarianceMode,
};
use crate::sampling::{ObservationMap, Population, RandomStream};
use crate::stopping::{run_len_mean, run_trial_into, StoppedSample, StoppingRule};

type PopulationCtor = Arc<dyn Fn(f64) -> Population + Send + Sync>;

/// A family of populations to resample from.
#[derive(Clone)]
pub enum ResamplingFamily {
    /// The empirical distribution of the observed scalars (singleton
    /// family: the `theta` argument of the simulation is ignored and the
    /// root is centered at the estimate from this data).
    Bootstrap { data: Vec<f64> },
    /// Shifted empirical family: centered residuals translated to mean
    /// `theta`.
    HybridShift { residuals: Vec<f64> },
    /// Parametric family `theta -> Population`.
    Parametric { make: PopulationCtor },
}

impl std::fmt::Debug for ResamplingFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResamplingFamily::Bootstrap { data } => {
                write!(f, "Bootstrap {{ n: {} }}", data.len())
            }
            ResamplingFamily::HybridShift { residuals } => {
                write!(f, "HybridShift {{ n: {} }}", residuals.len())
            }
            ResamplingFamily::Parametric { .. } => write!(f, "Parametric {{ .. }}"),
        }
    }
}

impl ResamplingFamily {
    /// Bootstrap family over the observed scalars.
    pub fn bootstrap(data: &[f64]) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyResamplingSupport);
        }
        Ok(ResamplingFamily::Bootstrap {
            data: data.to_vec(),
        })
    }

    /// Hybrid-shift family from observed scalars: stores the residuals
    /// `X_i - Xbar` (re-centered once more so their mean is exactly zero
    /// up to rounding of the final subtraction).
    pub fn hybrid_shift(data: &[f64]) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyResamplingSupport);
        }
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let mut residuals: Vec<f64> = data.iter().map(|x| x - mean).collect();
        let remainder = residuals.iter().sum::<f64>() / n;
        for r in residuals.iter_mut() {
            *r -= remainder;
        }
        Ok(ResamplingFamily::HybridShift { residuals })
    }

    /// Parametric family from a population constructor.
    pub fn parametric<F>(make: F) -> Self
    where
        F: Fn(f64) -> Population + Send + Sync + 'static,
    {
        ResamplingFamily::Parametric {
            make: Arc::new(make),
        }
    }

    /// The normal location family `theta -> N(theta, 1)` used by the exact
    /// method.
    pub fn parametric_normal() -> Self {
        ResamplingFamily::parametric(|theta| {
            Population::normal(theta, 1.0).expect("unit sigma is always valid")
        })
    }

    /// The population this family assigns to `theta`.
    fn population_at(&self, theta: f64) -> Result<Population> {
        match self {
            ResamplingFamily::Bootstrap { data } => Population::empirical(data.clone()),
            ResamplingFamily::HybridShift { residuals } => {
                Population::shifted_empirical(residuals, theta)
            }
            ResamplingFamily::Parametric { make } => {
                let pop = make(theta);
                pop.validate()?;
                Ok(pop)
            }
        }
    }
}

/// Which root a resample evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootKind {
    /// `sqrt(T)(h(Xbar) - theta) / sigma`.
    Naive,
    /// Naive minus the plug-in bias correction `b_hat / sqrt(T)` (scaled
    /// by `sigma`).
    BiasCorrected,
    /// Bias-corrected and renormalized; scalar known-unit-variance only.
    Renormalized,
}

/// A root together with everything needed to evaluate it on a resample.
#[derive(Debug, Clone)]
pub struct RootSpec {
    kind: RootKind,
    rule: StoppingRule,
    map: ObservationMap,
    h: SmoothFn,
    variance: VarianceMode,
}

impl RootSpec {
    pub fn new(
        kind: RootKind,
        rule: StoppingRule,
        map: ObservationMap,
        h: SmoothFn,
        variance: VarianceMode,
    ) -> Result<Self> {
        if map.d() != rule.d() {
            return Err(Error::DimensionMismatch(format!(
                "observation map dimension {} != rule dimension {}",
                map.d(),
                rule.d()
            )));
        }
        h.check_dim(rule.d())?;
        if kind == RootKind::Renormalized
            && (variance != VarianceMode::KnownUnit
                || rule.d() != 1
                || !matches!(h, SmoothFn::Coordinate(0)))
        {
            return Err(Error::InvalidConfig(
                "renormalized roots require a scalar mean with known unit variance".into(),
            ));
        }
        Ok(RootSpec {
            kind,
            rule,
            map,
            h,
            variance,
        })
    }

    /// Same spec with a different root kind.
    pub fn with_kind(&self, kind: RootKind) -> Result<Self> {
        RootSpec::new(
            kind,
            self.rule.clone(),
            self.map,
            self.h.clone(),
            self.variance,
        )
    }

    pub fn kind(&self) -> RootKind {
        self.kind
    }

    pub fn rule(&self) -> &StoppingRule {
        &self.rule
    }

    pub fn map(&self) -> ObservationMap {
        self.map
    }

    pub fn h(&self) -> &SmoothFn {
        &self.h
    }

    pub fn variance(&self) -> VarianceMode {
        self.variance
    }

    /// True when the scalar known-variance shortcut applies: no observation
    /// storage, no covariance pass.
    fn scalar_known(&self) -> bool {
        self.rule.d() == 1
            && self.map == ObservationMap::Identity
            && self.variance == VarianceMode::KnownUnit
            && matches!(self.h, SmoothFn::Coordinate(0))
    }

    /// Estimate of `h` at this spec's lifted mean of raw scalars — the
    /// center the bootstrap evaluates its roots at.
    fn estimate_from(&self, data: &[f64]) -> f64 {
        let d = self.map.d();
        let mut sums = vec![0.0; d];
        let mut buf = vec![0.0; d];
        for &x in data {
            self.map.lift(x, &mut buf);
            for i in 0..d {
                sums[i] += buf[i];
            }
        }
        let n = data.len() as f64;
        for s in sums.iter_mut() {
            *s /= n;
        }
        self.h.eval(&sums)
    }
}

/// Evaluate a scalar known-unit-variance root from `(T, Xbar)` alone.
///
/// Expressions match the general evaluators in [`crate::pivots`] operation
/// for operation, so both paths produce bit-identical values.
#[inline]
pub(crate) fn scalar_known_root(
    kind: RootKind,
    rule: &StoppingRule,
    t: usize,
    xbar: f64,
    center: f64,
) -> f64 {
    let t = t as f64;
    match kind {
        RootKind::Naive => t.sqrt() * (xbar - center),
        RootKind::BiasCorrected => {
            let b = bias_known_scalar(rule, xbar);
            t.sqrt() * (xbar - center) - b / t.sqrt()
        }
        RootKind::Renormalized => {
            let b = bias_known_scalar(rule, xbar);
            (t.sqrt() * (xbar - center) - b / t.sqrt()) / (1.0 + b * b / (2.0 * t))
        }
    }
}

/// Simulate `b_reps` independent realizations of the root under `family`
/// at `theta` and return them sorted ascending.
///
/// Replicate `b` draws from `stream.child(b)`, so each replicate is a pure
/// function of the parent stream's identity: increasing `b_reps` extends
/// the set of roots without changing earlier ones, and replicates may be
/// computed in any order (they are aggregated by a final sort).
///
/// The bootstrap family evaluates roots at the estimate derived from its
/// own data; the hybrid and parametric families evaluate at `theta`.
pub fn simulate_root_distribution(
    family: &ResamplingFamily,
    theta: f64,
    spec: &RootSpec,
    b_reps: usize,
    stream: &RandomStream,
) -> Result<Vec<f64>> {
    if b_reps == 0 {
        return Err(Error::InvalidConfig(
            "resampling needs at least one replicate".into(),
        ));
    }
    let center = match family {
        ResamplingFamily::Bootstrap { data } => spec.estimate_from(data),
        _ => theta,
    };
    let pop = family.population_at(theta)?;
    let mut roots = Vec::with_capacity(b_reps);

    if spec.scalar_known() {
        for b in 0..b_reps {
            let mut s = stream.child(b as u64);
            let (t, xbar) = run_len_mean(&spec.rule, &pop, &mut s);
            roots.push(scalar_known_root(spec.kind, &spec.rule, t, xbar, center));
        }
    } else {
        let mut sample = StoppedSample::empty(spec.map);
        for b in 0..b_reps {
            let mut s = stream.child(b as u64);
            run_trial_into(&spec.rule, &pop, spec.map, &mut s, &mut sample)?;
            let root = match spec.kind {
                RootKind::Naive => naive_pivot(&sample, &spec.h, center, spec.variance)?,
                RootKind::BiasCorrected => {
                    bias_corrected_pivot(&sample, &spec.rule, &spec.h, center, spec.variance)?
                }
                RootKind::Renormalized => renormalized_pivot(&sample, &spec.rule, center)?,
            };
            roots.push(root);
        }
    }
    roots.sort_unstable_by(f64::total_cmp);
    Ok(roots)
}

/// Lower and upper empirical quantiles `(q_alpha, q_{1-alpha})` of an
/// ascending list, under the interpolation convention of
/// [`crate::numerics::empirical_quantile`].
pub fn quantile_pair(sorted_values: &[f64], alpha: f64) -> Result<(f64, f64)> {
    if sorted_values.is_empty() {
        return Err(Error::Domain("quantile pair of an empty list".into()));
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Domain(format!(
            "quantile pair needs alpha in (0, 0.5), got {alpha}"
        )));
    }
    debug_assert!(
        sorted_values.windows(2).all(|w| w[0] <= w[1]),
        "quantile_pair input must be sorted ascending"
    );
    Ok((
        sorted_quantile(sorted_values, alpha),
        sorted_quantile(sorted_values, 1.0 - alpha),
    ))
}

// ---------------------------------------------------------------------------
