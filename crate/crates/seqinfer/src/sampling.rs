//! Deterministic, splittable random streams and the population laws the
//! toolkit samples from.
//!
//! Reproducibility contract: every draw is a pure function of
//! `(master_seed, stream_id, counter)`. Streams are counter-based — creating
//! a stream, cloning it, or deriving a child via [`RandomStream::child`]
//! never consumes randomness from any other stream, so results do not depend
//! on construction order or thread schedule.
//!
//! Draw recipes are part of the contract (golden values survive refactors):
//!
//! - uniforms take the high 53 bits of a mixed 64-bit word;
//! - normal draws invert the normal CDF at a uniform in (0, 1);
//! - exponential draws are `-ln(U)` with `U` in (0, 1].

use crate::error::{Error, Result};
use crate::numerics::normal_quantile_unchecked;

// ---------------------------------------------------------------------------
// Counter-based stream
// ---------------------------------------------------------------------------

/// Weyl increment from the golden ratio; the classic SplitMix64 constant.
const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stafford "Mix13" finalizer: a strong invertible 64-bit mix.
#[inline(always)]
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

/// Combine a key with an index to derive an independent subkey.
#[inline(always)]
fn derive_key(key: u64, index: u64) -> u64 {
    mix64(key ^ mix64(index.wrapping_add(GOLDEN_GAMMA)))
}

/// A seedable, splittable, counter-based random stream.
///
/// Internally this is SplitMix64 evaluated in counter mode: output `n` is
/// `mix64(key + (n + 1) * GOLDEN_GAMMA)`, where `key` is derived by mixing
/// `(master_seed, stream_id)`. Two streams with different ids behave as
/// independent sequences; the same `(master_seed, stream_id)` always
/// reproduces the same sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomStream {
    key: u64,
    counter: u64,
}

impl RandomStream {
    /// Create the stream identified by `(master_seed, stream_id)`.
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RandomStream {
            key: derive_key(mix64(master_seed), stream_id),
            counter: 0,
        }
    }

    /// Derive child stream `index` of this stream. Children are independent
    /// of the parent's counter position and of one another, so extending a
    /// loop over children reuses earlier children's draws unchanged.
    pub fn child(&self, index: u64) -> Self {
        RandomStream {
            key: derive_key(self.key, index),
            counter: 0,
        }
    }

    /// Next raw 64-bit word.
    #[inline(always)]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform draw in the open interval (0, 1): `(w >> 11 + 0.5) * 2^-53`.
    #[inline(always)]
    pub fn next_uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in the half-open interval (0, 1]: `(w >> 11 + 1) * 2^-53`.
    #[inline(always)]
    fn next_uniform_oc(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw by inverting the normal CDF at a (0, 1) uniform.
    #[inline(always)]
    pub fn next_normal(&mut self) -> f64 {
        normal_quantile_unchecked(self.next_uniform())
    }

    /// Standard exponential draw: `-ln(U)` with `U` in (0, 1].
    #[inline(always)]
    pub fn next_exponential(&mut self) -> f64 {
        -self.next_uniform_oc().ln()
    }

    /// Uniform index in `0..n` (Lemire multiply-shift reduction).
    #[inline(always)]
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (((self.next_u64() as u128) * (n as u128)) >> 64) as usize
    }

    /// Number of 64-bit words consumed so far; useful for accounting in
    /// tests and diagnostics.
    pub fn position(&self) -> u64 {
        self.counter
    }
}

/// Build the stream identified by `(master_seed, stream_id)`.
///
/// Free-function spelling of [`RandomStream::new`].
pub fn make_stream(master_seed: u64, stream_id: u64) -> RandomStream {
    RandomStream::new(master_seed, stream_id)
}

// ---------------------------------------------------------------------------
// Populations
// ---------------------------------------------------------------------------

/// A sampling law for scalar observations.
#[derive(Debug, Clone)]
pub enum Population {
    /// Normal with the given mean and standard deviation (`sigma >= 0`;
    /// zero gives a point mass, useful for degenerate-path tests).
    NormalKnownVar { mu: f64, sigma: f64 },
    /// Mixture with mean `mu` and unit variance: with probability 0.2 a
    /// `N(mu, 1)` draw, with probability 0.8 `mu + (E - 1)` where `E` is
    /// standard exponential.
    NormalExpMixture { mu: f64 },
    /// The empirical distribution of a fixed list of values.
    Empirical { data: Vec<f64> },
    /// Empirical residuals re-centred to mean `mu`. The residual list is
    /// centred once at construction so the population mean is `mu` to
    /// machine precision; construct via [`Population::shifted_empirical`].
    ShiftedEmpirical { residuals: Vec<f64>, mu: f64 },
}

impl Population {
    /// Normal population with known standard deviation.
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) {
            return Err(Error::Domain(format!(
                "normal population requires sigma >= 0, got {sigma}"
            )));
        }
        Ok(Population::NormalKnownVar { mu, sigma })
    }

    /// Unit-variance normal/exponential mixture with mean `mu`.
    pub fn mixture(mu: f64) -> Self {
        Population::NormalExpMixture { mu }
    }

    /// Empirical distribution of `data` (must be nonempty).
    pub fn empirical(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyResamplingSupport);
        }
        Ok(Population::Empirical { data })
    }

    /// Empirical residual distribution shifted to mean `mu`.
    ///
    /// `values` are centred by their own mean (nonempty required); the
    /// stored residuals average to zero up to rounding, so draws have mean
    /// `mu` exactly over the residual list.
    pub fn shifted_empirical(values: &[f64], mu: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyResamplingSupport);
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let residuals: Vec<f64> = values.iter().map(|v| v - mean).collect();
        Ok(Population::ShiftedEmpirical { residuals, mu })
    }

    /// Check drawability (empirical variants need nonempty support).
    pub fn validate(&self) -> Result<()> {
        match self {
            Population::Empirical { data } if data.is_empty() => {
                Err(Error::EmptyResamplingSupport)
            }
            Population::ShiftedEmpirical { residuals, .. } if residuals.is_empty() => {
                Err(Error::EmptyResamplingSupport)
            }
            Population::NormalKnownVar { sigma, .. } if !(*sigma >= 0.0) => {
                Err(Error::Domain("negative sigma".into()))
            }
            _ => Ok(()),
        }
    }

    /// Draw one observation.
    pub fn draw(&self, stream: &mut RandomStream) -> Result<f64> {
        self.validate()?;
        Ok(self.draw_validated(stream))
    }

    /// Draw assuming [`Population::validate`] has already passed; used by
    /// simulation loops that validate once up front.
    #[inline(always)]
    pub(crate) fn draw_validated(&self, stream: &mut RandomStream) -> f64 {
        match self {
            Population::NormalKnownVar { mu, sigma } => mu + sigma * stream.next_normal(),
            Population::NormalExpMixture { mu } => {
                // Branch uniform first, then the component draw, so exactly
                // two words are consumed per observation.
                if stream.next_uniform() < 0.2 {
                    mu + stream.next_normal()
                } else {
                    mu + (stream.next_exponential() - 1.0)
                }
            }
            Population::Empirical { data } => data[stream.next_index(data.len())],
            Population::ShiftedEmpirical { residuals, mu } => {
                residuals[stream.next_index(residuals.len())] + mu
            }
        }
    }

    /// The population mean (exact for parametric laws; the list average for
    /// empirical laws).
    pub fn mean(&self) -> f64 {
        match self {
            Population::NormalKnownVar { mu, .. } => *mu,
            Population::NormalExpMixture { mu } => *mu,
            Population::Empirical { data } => {
                data.iter().sum::<f64>() / data.len().max(1) as f64
            }
            Population::ShiftedEmpirical { residuals, mu } => {
                mu + residuals.iter().sum::<f64>() / residuals.len().max(1) as f64
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Observation maps
// ---------------------------------------------------------------------------

/// Deterministic lift from scalar draws to the d-vectors the stopping rule
/// and functional consume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationMap {
    /// d = 1: the observation itself.
    Identity,
    /// d = 2: `x -> (x, x^2)`, the lift that lets a mean/second-moment rule
    /// (e.g. a studentized boundary) run on running sums.
    SquareLift,
}

impl ObservationMap {
    /// Output dimension.
    #[inline(always)]
    pub fn d(&self) -> usize {
        match self {
            ObservationMap::Identity => 1,
            ObservationMap::SquareLift => 2,
        }
    }

    /// Lift one scalar into `out[..self.d()]`.
    #[inline(always)]
    pub fn lift(&self, x: f64, out: &mut [f64]) {
        match self {
            ObservationMap::Identity => out[0] = x,
            ObservationMap::SquareLift => {
                out[0] = x;
                out[1] = x * x;
            }
        }
    }
}

/// Lift a scalar sequence into a list of d-vectors.
pub fn lift_sequence(map: ObservationMap, xs: &[f64]) -> Vec<Vec<f64>> {
    xs.iter()
        .map(|&x| {
            let mut v = vec![0.0; map.d()];
            map.lift(x, &mut v);
            v
        })
        .collect()
}

// ---------------------------------------------------------------------------
