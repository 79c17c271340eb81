//! Pivotal quantities for inference after sequential stopping.
//!
//! For a smooth functional `h` of the stopped mean, the naive studentized
//! root treats `T` as if it were fixed:
//!
//! ```text
//! R0(theta) = sqrt(T) (h(Xbar_T) - theta) / sigma_hat
//! ```
//!
//! Optional stopping correlates `T` with the sample path and tilts this
//! root. The first-order tilt is `b(mu, V) / sqrt(T)` with
//!
//! ```text
//! b(mu, V) = grad(kappa^1/2)(mu)' V grad(h)(mu) / kappa^1/2(mu)
//!          + tr(hess(h)(mu) V) / 2
//! ```
//!
//! where `kappa` is the in-probability limit of `a/T`. Subtracting the
//! plug-in estimate of the tilt gives the bias-corrected root `R1`; for
//! scalar means with known unit variance there is additionally a
//! renormalized root whose variance correction enters through the
//! denominator. All three are evaluated here, together with the moment
//! estimates they studentize by.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{fd_gradient, fd_hessian};
use crate::stopping::{StoppedSample, StoppingRule, MAX_D};

/// Absolute tolerance for detecting a clamp-boundary kink of `kappa`.
pub const KINK_TOL: f64 = 1e-9;

/// Whether the scalar scale is known to be one or estimated from the sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    /// Unit variance known a priori; pivots divide by 1.
    KnownUnit,
    /// Scale estimated by `sigma_hat` from the stopped sample.
    Estimated,
}

// ---------------------------------------------------------------------------
// Smooth functionals of the mean
// ---------------------------------------------------------------------------

type DynScalar = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type DynVector = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A smooth real functional of the lifted mean.
#[derive(Clone)]
pub enum SmoothFn {
    /// `h(x) = x[i]`: the identity on scalars (`i = 0`, d = 1) or a
    /// coordinate projection such as "the mean" on a `(mean, second moment)`
    /// lift.
    Coordinate(usize),
    /// User-supplied functional with optional analytic derivatives;
    /// central finite differences fill the gaps.
    Custom {
        d: usize,
        h: DynScalar,
        grad: Option<DynVector>,
        hessian: Option<DynVector>,
    },
}

impl std::fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SmoothFn::Coordinate(i) => write!(f, "Coordinate({i})"),
            SmoothFn::Custom { d, .. } => write!(f, "Custom {{ d: {d}, .. }}"),
        }
    }
}

impl SmoothFn {
    /// The identity functional on scalar means.
    pub fn identity() -> Self {
        SmoothFn::Coordinate(0)
    }

    /// Evaluate `h(mu)`.
    pub fn eval(&self, mu: &[f64]) -> f64 {
        match self {
            SmoothFn::Coordinate(i) => mu[*i],
            SmoothFn::Custom { h, .. } => h(mu),
        }
    }

    /// Gradient of `h` at `mu`, written into `out`.
    pub fn grad(&self, mu: &[f64], out: &mut [f64]) {
        match self {
            SmoothFn::Coordinate(i) => {
                out.fill(0.0);
                out[*i] = 1.0;
            }
            SmoothFn::Custom { h, grad, .. } => match grad {
                Some(g) => g(mu, out),
                None => fd_gradient(|x| h(x), mu, out),
            },
        }
    }

    /// Hessian of `h` at `mu`, written row-major into `out` (`d * d`).
    pub fn hessian(&self, mu: &[f64], out: &mut [f64]) {
        match self {
            SmoothFn::Coordinate(_) => out.fill(0.0),
            SmoothFn::Custom { h, hessian, .. } => match hessian {
                Some(hs) => hs(mu, out),
                None => fd_hessian(|x| h(x), mu, out),
            },
        }
    }

    /// Linear functionals have identically zero Hessians, letting the bias
    /// functional skip the trace term.
    fn is_linear(&self) -> bool {
        matches!(self, SmoothFn::Coordinate(_))
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        match self {
            SmoothFn::Coordinate(i) if *i >= d => Err(Error::DimensionMismatch(format!(
                "coordinate functional index {i} out of range for d = {d}"
            ))),
            SmoothFn::Custom { d: hd, .. } if *hd != d => {
                Err(Error::DimensionMismatch(format!(
                    "functional dimension {hd} != sample dimension {d}"
                )))
            }
            _ => Ok(()),
        }
    }
}

// ---------------------------------------------------------------------------
// Moment estimates
// ---------------------------------------------------------------------------

/// A small symmetric matrix (row-major, `d <= MAX_D`).
#[derive(Debug, Clone, PartialEq)]
pub struct Cov {
    d: usize,
    data: Vec<f64>,
}

impl Cov {
    /// Identity of dimension `d`.
    pub fn identity(d: usize) -> Self {
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            data[i * d + i] = 1.0;
        }
        Cov { d, data }
    }

    /// Build from a row-major slice of length `d * d`.
    pub fn from_rows(d: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "covariance needs {} entries for d = {d}, got {}",
                d * d,
                data.len()
            )));
        }
        Ok(Cov { d, data })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Sample covariance of the lifted observations and the induced standard
/// error of `h`.
#[derive(Debug, Clone)]
pub struct MomentEstimates {
    /// `V_hat = sum (X_i - Xbar)(X_i - Xbar)' / (T - 1)`.
    pub cov: Cov,
    /// `sigma_hat = sqrt(grad h' V_hat grad h)` at the stopped mean.
    pub sigma_hat: f64,
}

/// Two-pass covariance (divisor `T - 1`) and the delta-method scale of `h`.
///
/// Errors with `degenerate sample` when `T < 2`.
pub fn moment_estimates(sample: &StoppedSample, h: &SmoothFn) -> Result<MomentEstimates> {
    let d = sample.d();
    h.check_dim(d)?;
    let mut v = vec![0.0; d * d];
    let sigma_hat = moment_core(sample, h, &mut v)?;
    Ok(MomentEstimates {
        cov: Cov { d, data: v },
        sigma_hat,
    })
}

/// Allocation-light core shared with resampling loops: fills `v_out`
/// (row-major `d * d`) and returns `sigma_hat`.
pub(crate) fn moment_core(
    sample: &StoppedSample,
    h: &SmoothFn,
    v_out: &mut [f64],
) -> Result<f64> {
    let d = sample.d();
    let t = sample.t();
    if t < 2 {
        return Err(Error::DegenerateSample);
    }
    debug_assert_eq!(v_out.len(), d * d);
    let mean = sample.mean();
    v_out.fill(0.0);
    let mut row = [0.0_f64; MAX_D];
    let mut dx = [0.0_f64; MAX_D];
    for i in 0..t {
        sample.obs_into(i, &mut row[..d]);
        for k in 0..d {
            dx[k] = row[k] - mean[k];
        }
        for r in 0..d {
            for c in r..d {
                v_out[r * d + c] += dx[r] * dx[c];
            }
        }
    }
    let denom = (t - 1) as f64;
    for r in 0..d {
        for c in r..d {
            let val = v_out[r * d + c] / denom;
            v_out[r * d + c] = val;
            v_out[c * d + r] = val;
        }
    }
    let mut grad_h = [0.0_f64; MAX_D];
    h.grad(mean, &mut grad_h[..d]);
    let mut quad = 0.0;
    for r in 0..d {
        for c in 0..d {
            quad += grad_h[r] * v_out[r * d + c] * grad_h[c];
        }
    }
    Ok(quad.max(0.0).sqrt())
}

// ---------------------------------------------------------------------------
// kappa^{1/2} gradient and the bias functional
// ---------------------------------------------------------------------------

/// Gradient of `kappa^{1/2}` with clamp/kink bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaGradient {
    /// `0.5 * grad g / sqrt(g)` strictly inside the clamp band, zero
    /// outside it and at kinks.
    pub vector: Vec<f64>,
    /// True when `g(mu)` sits within [`KINK_TOL`] of a clamp boundary,
    /// where the one-sided derivatives disagree.
    pub at_kink: bool,
}

/// Gradient of `mu -> sqrt(kappa(mu))`.
///
/// `kappa = max(eps0, min(g, eps1))` is flat in the clamped regions, so the
/// gradient is zero there; at the clamp boundaries (within [`KINK_TOL`]) the
/// function is not differentiable and the zero vector is returned with
/// `at_kink` set.
pub fn grad_kappa_sqrt(rule: &StoppingRule, mu: &[f64]) -> KappaGradient {
    let d = rule.d();
    let mut out = vec![0.0; d];
    let at_kink = grad_kappa_sqrt_into(rule, mu, &mut out);
    KappaGradient {
        vector: out,
        at_kink,
    }
}

/// Core of [`grad_kappa_sqrt`]; returns the kink flag.
fn grad_kappa_sqrt_into(rule: &StoppingRule, mu: &[f64], out: &mut [f64]) -> bool {
    let g_val = rule.boundary().eval(mu);
    let (eps0, eps1) = (rule.eps0(), rule.eps1());
    out.fill(0.0);
    if (g_val - eps0).abs() <= KINK_TOL || (g_val - eps1).abs() <= KINK_TOL {
        return true;
    }
    if g_val > eps0 && g_val < eps1 {
        rule.boundary().grad(mu, out);
        let scale = 0.5 / g_val.sqrt();
        for v in out.iter_mut() {
            *v *= scale;
        }
    }
    false
}

/// The first-order bias functional
/// `b(mu, V) = grad(kappa^1/2)' V grad(h) / kappa^1/2 + tr(hess(h) V) / 2`.
///
/// `kappa` is bounded below by `a / n0 > 0`, so the division is always
/// defined; in clamped regions the first term vanishes with the gradient.
pub fn bias(rule: &StoppingRule, mu: &[f64], v: &Cov, h: &SmoothFn) -> f64 {
    debug_assert_eq!(v.d(), rule.d());
    bias_flat(rule, mu, v.as_slice(), h)
}

pub(crate) fn bias_flat(rule: &StoppingRule, mu: &[f64], v: &[f64], h: &SmoothFn) -> f64 {
    let d = rule.d();
    debug_assert_eq!(v.len(), d * d);
    let mut grad_k = [0.0_f64; MAX_D];
    grad_kappa_sqrt_into(rule, mu, &mut grad_k[..d]);

    let mut grad_h = [0.0_f64; MAX_D];
    h.grad(mu, &mut grad_h[..d]);

    let kappa_sqrt = rule.kappa(mu).sqrt();
    let mut first = 0.0;
    for r in 0..d {
        if grad_k[r] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for c in 0..d {
            row += v[r * d + c] * grad_h[c];
        }
        first += grad_k[r] * row;
    }
    let mut b = first / kappa_sqrt;

    if !h.is_linear() {
        let mut hess = [0.0_f64; MAX_D * MAX_D];
        h.hessian(mu, &mut hess[..d * d]);
        let mut trace = 0.0;
        for r in 0..d {
            for c in 0..d {
                trace += hess[r * d + c] * v[c * d + r];
            }
        }
        b += 0.5 * trace;
    }
    b
}

/// Scalar known-unit-variance bias `b(x) = g'(x) / (2 g(x))` inside the
/// clamp band, zero outside and at kinks. Algebraically `bias` with
/// `V = [1]`, `h` identity; kept separate as the hot path of the
/// known-variance corrected pivots.
pub(crate) fn bias_known_scalar(rule: &StoppingRule, x: f64) -> f64 {
    let mu = [x];
    let g_val = rule.boundary().eval(&mu);
    let (eps0, eps1) = (rule.eps0(), rule.eps1());
    if (g_val - eps0).abs() <= KINK_TOL || (g_val - eps1).abs() <= KINK_TOL {
        return 0.0;
    }
    if g_val > eps0 && g_val < eps1 {
        let mut gr = [0.0_f64; 1];
        rule.boundary().grad(&mu, &mut gr);
        gr[0] / (2.0 * g_val)
    } else {
        0.0
    }
}

// ---------------------------------------------------------------------------
// Pivot evaluation
// ---------------------------------------------------------------------------

fn check_sample_rule(sample: &StoppedSample, rule: &StoppingRule) -> Result<()> {
    if sample.d() != rule.d() {
        return Err(Error::DimensionMismatch(format!(
            "sample dimension {} != rule dimension {}",
            sample.d(),
            rule.d()
        )));
    }
    Ok(())
}

fn scale_for(sample: &StoppedSample, h: &SmoothFn, mode: VarianceMode) -> Result<f64> {
    match mode {
        VarianceMode::KnownUnit => Ok(1.0),
        VarianceMode::Estimated => {
            let est = moment_estimates(sample, h)?;
            if est.sigma_hat > 0.0 {
                Ok(est.sigma_hat)
            } else {
                Err(Error::ZeroEstimatedVariance)
            }
        }
    }
}

/// The naive root `R0 = sqrt(T) (h(Xbar_T) - theta) / sigma`.
pub fn naive_pivot(
    sample: &StoppedSample,
    h: &SmoothFn,
    theta: f64,
    mode: VarianceMode,
) -> Result<f64> {
    h.check_dim(sample.d())?;
    let sigma = scale_for(sample, h, mode)?;
    let t = sample.t() as f64;
    Ok(t.sqrt() * (h.eval(sample.mean()) - theta) / sigma)
}

/// The bias-corrected root
/// `R1 = [sqrt(T) (h(Xbar_T) - theta) - b_hat / sqrt(T)] / sigma`,
/// with `b_hat = b(Xbar_T, V_hat)` (identity `V` in known-variance mode).
pub fn bias_corrected_pivot(
    sample: &StoppedSample,
    rule: &StoppingRule,
    h: &SmoothFn,
    theta: f64,
    mode: VarianceMode,
) -> Result<f64> {
    check_sample_rule(sample, rule)?;
    h.check_dim(sample.d())?;
    let t = sample.t() as f64;
    let (sigma, b_hat) = match mode {
        VarianceMode::KnownUnit => {
            // Scalar identity case: take the same expression as the
            // resampling fast path so the two agree bit for bit.
            let b_hat = if sample.d() == 1 && matches!(h, SmoothFn::Coordinate(0)) {
                bias_known_scalar(rule, sample.mean()[0])
            } else {
                bias(rule, sample.mean(), &Cov::identity(sample.d()), h)
            };
            (1.0, b_hat)
        }
        VarianceMode::Estimated => {
            let est = moment_estimates(sample, h)?;
            if est.sigma_hat <= 0.0 {
                return Err(Error::ZeroEstimatedVariance);
            }
            let b_hat = bias(rule, sample.mean(), &est.cov, h);
            (est.sigma_hat, b_hat)
        }
    };
    Ok((t.sqrt() * (h.eval(sample.mean()) - theta) - b_hat / t.sqrt()) / sigma)
}

/// The renormalized root for scalar means with known unit variance:
///
/// ```text
/// R = [sqrt(T)(Xbar_T - mu) - b(Xbar_T)/sqrt(T)] / [1 + b^2(Xbar_T)/(2T)]
/// ```
pub fn renormalized_pivot(sample: &StoppedSample, rule: &StoppingRule, mu: f64) -> Result<f64> {
    check_sample_rule(sample, rule)?;
    if sample.d() != 1 {
        return Err(Error::DimensionMismatch(
            "renormalized pivot is defined for scalar means only".into(),
        ));
    }
    let t = sample.t() as f64;
    let xbar = sample.mean()[0];
    let b = bias_known_scalar(rule, xbar);
    Ok((t.sqrt() * (xbar - mu) - b / t.sqrt()) / (1.0 + b * b / (2.0 * t)))
}

// ---------------------------------------------------------------------------
