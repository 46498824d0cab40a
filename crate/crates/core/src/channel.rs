//! Rayleigh fading, AWGN and the keyed random streams behind every draw.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Complex baseband value used for symbols, channel taps and noise.
pub type ComplexSample = Complex64;

/// Deterministic generator used throughout the simulator.
pub type SimRng = ChaCha8Rng;

/// One Rayleigh channel realization together with its mean power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGain {
    pub coefficient: ComplexSample,
    pub variance: f64,
}

impl LinkGain {
    /// Instantaneous channel gain `|h|^2`.
    pub fn power(&self) -> f64 {
        self.coefficient.norm_sqr()
    }
}

/// Receiver noise variance `N0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    n0: f64,
}

impl NoiseParams {
    pub fn new(n0: f64) -> Result<Self> {
        check_positive("noise variance", n0)?;
        Ok(Self { n0 })
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }
}

/// Draws a circularly-symmetric complex Gaussian coefficient with
/// `E[|h|^2] = variance`.
pub fn draw_rayleigh<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Result<LinkGain> {
    check_positive("link variance", variance)?;
    Ok(LinkGain {
        coefficient: complex_gaussian(rng, variance),
        variance,
    })
}

/// Draws one complex AWGN sample with total variance `n0`.
pub fn draw_awgn<R: Rng + ?Sized>(n0: f64, rng: &mut R) -> Result<ComplexSample> {
    check_positive("noise variance", n0)?;
    Ok(complex_gaussian(rng, n0))
}

/// Zero-mean complex Gaussian with total variance `variance`; the caller
/// guarantees `variance >= 0`.
#[inline]
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> ComplexSample {
    let sigma = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    ComplexSample::new(sigma * re, sigma * im)
}

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub fn linear_to_db(x: f64) -> Result<f64> {
    check_positive("linear power ratio", x)?;
    Ok(10.0 * x.log10())
}

fn check_positive(what: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{what} must be positive and finite, got {value}")))
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a path of identifiers (link, point, chunk, ...) into a sub-seed.
///
/// Distinct paths give statistically independent seeds; the result depends
/// only on `(seed, path)`, never on the order in which streams are created.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    let mut state = mix64(seed ^ 0x9e37_79b9_7f4a_7c15);
    for (depth, id) in path.iter().enumerate() {
        state = mix64(state ^ mix64(id.wrapping_add((depth as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15))));
    }
    state
}

/// Opens the random stream named by `(seed, path)`.
pub fn stream(seed: u64, path: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(seed, path))
}
