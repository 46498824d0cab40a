//! Two-phase amplify-and-forward transmission.
//!
//! Phase I: the source broadcasts `x` with power `P_S`; the end device, every
//! candidate device and the eavesdropper each receive it through their own
//! Rayleigh link and noise. Phase II: each forwarding device scales its
//! Phase-I observation by `alpha_i` and retransmits it to the end device,
//! which the eavesdropper also overhears.

use rand::Rng;

use crate::channel::{complex_gaussian, ComplexSample, LinkGain, NoiseParams};
use crate::topology::PowerAllocation;
use crate::{Error, Result};

/// Links out of the source.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceLinks {
    pub to_end_device: LinkGain,
    pub to_devices: Vec<LinkGain>,
    pub to_eavesdropper: LinkGain,
}

/// Links out of each device, indexed like [`SourceLinks::to_devices`].
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceLinks {
    pub to_end_device: Vec<LinkGain>,
    pub to_eavesdropper: Vec<LinkGain>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOneObservation {
    pub at_end_device: ComplexSample,
    pub at_device: Vec<ComplexSample>,
    pub at_eavesdropper: ComplexSample,
    pub gains: SourceLinks,
}

/// Phase-II observations, one entry per forwarding device in `devices`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RelayedObservation {
    pub devices: Vec<usize>,
    pub at_end_device: Vec<ComplexSample>,
    pub at_eavesdropper: Vec<ComplexSample>,
    pub amplification: Vec<f64>,
}

pub fn phase_one<R: Rng + ?Sized>(
    symbol: ComplexSample,
    alloc: &PowerAllocation,
    gains: &SourceLinks,
    noise: NoiseParams,
    rng: &mut R,
) -> PhaseOneObservation {
    debug_assert!((symbol.norm() - 1.0).abs() < 1e-9, "symbol must have unit energy");
    let n0 = noise.n0();
    let tx = alloc.p_source.sqrt() * symbol;
    let mut receive = |link: &LinkGain| link.coefficient * tx + complex_gaussian(rng, n0);
    let at_end_device = receive(&gains.to_end_device);
    let at_device = gains.to_devices.iter().map(&mut receive).collect();
    let at_eavesdropper = receive(&gains.to_eavesdropper);
    PhaseOneObservation { at_end_device, at_device, at_eavesdropper, gains: gains.clone() }
}

/// Fixed AF gain `sqrt(P_D) / sqrt(P_S * |h_SD|^2 + N0)` that keeps the
/// device's average transmit power at `P_D`.
pub fn amplification_factor(p_device: f64, p_source: f64, gain_sd_sq: f64, n0: f64) -> Result<f64> {
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::Parameter(format!("noise variance must be positive, got {n0}")));
    }
    if p_device < 0.0 || p_source < 0.0 || gain_sd_sq < 0.0 {
        return Err(Error::Parameter("powers and channel gains must be non-negative".into()));
    }
    Ok(p_device.sqrt() / (p_source * gain_sd_sq + n0).sqrt())
}

/// Forwards the Phase-I observations of `devices` to the end device and the
/// eavesdropper. Every receiver gets fresh noise.
pub fn phase_two<R: Rng + ?Sized>(
    phase1: &PhaseOneObservation,
    alloc: &PowerAllocation,
    links: &DeviceLinks,
    noise: NoiseParams,
    devices: &[usize],
    rng: &mut R,
) -> Result<RelayedObservation> {
    let n_candidates = phase1.at_device.len();
    if links.to_end_device.len() != n_candidates || links.to_eavesdropper.len() != n_candidates {
        return Err(Error::Parameter(format!(
            "{n_candidates} Phase-I observations but {}/{} device links",
            links.to_end_device.len(),
            links.to_eavesdropper.len()
        )));
    }
    let n0 = noise.n0();
    let mut out = RelayedObservation {
        devices: devices.to_vec(),
        at_end_device: Vec::with_capacity(devices.len()),
        at_eavesdropper: Vec::with_capacity(devices.len()),
        amplification: Vec::with_capacity(devices.len()),
    };
    for &i in devices {
        if i >= n_candidates {
            return Err(Error::Parameter(format!("device index {i} out of range (N = {n_candidates})")));
        }
        let alpha = amplification_factor(alloc.p_device, alloc.p_source, phase1.gains.to_devices[i].power(), n0)?;
        let forwarded = alpha * phase1.at_device[i];
        out.at_end_device.push(links.to_end_device[i].coefficient * forwarded + complex_gaussian(rng, n0));
        out.at_eavesdropper.push(links.to_eavesdropper[i].coefficient * forwarded + complex_gaussian(rng, n0));
        out.amplification.push(alpha);
    }
    Ok(out)
}

/// End-to-end SNR of one AF hop pair, `g1 g2 / (g1 + g2 + 1)`.
#[inline]
pub fn af_snr(snr_first_hop: f64, snr_second_hop: f64) -> f64 {
    let denom = snr_first_hop + snr_second_hop + 1.0;
    snr_first_hop * snr_second_hop / denom
}

/// Effective single-tap model of a received branch: `y = gain * x + w` with
/// `E|w|^2 = noise_variance`. MRC weights each branch by
/// `conj(gain) / noise_variance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub gain: ComplexSample,
    pub noise_variance: f64,
}

impl Branch {
    pub fn direct(p_source: f64, link: &LinkGain, n0: f64) -> Self {
        Self { gain: p_source.sqrt() * link.coefficient, noise_variance: n0 }
    }

    /// Relayed branch through a device with amplification `alpha`.
    pub fn relayed(p_source: f64, alpha: f64, first: &LinkGain, second: &LinkGain, n0: f64) -> Self {
        Self {
            gain: alpha * second.coefficient * p_source.sqrt() * first.coefficient,
            noise_variance: (alpha * alpha * second.power() + 1.0) * n0,
        }
    }

    pub fn snr(&self) -> f64 {
        self.gain.norm_sqr() / self.noise_variance
    }

    pub fn mrc_weight(&self) -> ComplexSample {
        self.gain.conj() / self.noise_variance
    }
}
