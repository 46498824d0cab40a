//! Everything needed to simulate one operating point: link statistics,
//! power split, thresholds and noise level.

use rand::Rng;

use crate::channel::{complex_gaussian, db_to_linear, ComplexSample, LinkGain};
use crate::relaying::{DeviceLinks, SourceLinks};
use crate::selection::{SchemeKind, Thresholds};
use crate::topology::{allocate_power, DistanceCase, PowerAllocation};
use crate::{Error, Result};

/// Mean channel gains of the three links touching one device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceVariances {
    pub source_to_device: f64,
    pub device_to_end: f64,
    pub device_to_eve: f64,
}

/// How many threshold-passing devices forward in Phase II.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CombineMode {
    /// Every device that passes the input threshold forwards.
    AllPassing,
    /// Only the top-ranked passing device forwards.
    Best,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub case: DistanceCase,
    pub devices: Vec<DeviceVariances>,
    pub thresholds: Thresholds,
    pub p_total: f64,
    pub n0: f64,
    /// `E|h_S,ED|^2`.
    pub direct_variance: f64,
    /// `E|h_S,E|^2`.
    pub eve_source_variance: f64,
    /// Overrides the scheme's default use of the direct source link.
    pub direct_path: Option<bool>,
    pub combine: CombineMode,
    /// Whether the eavesdropper's intercept capacity includes the Phase-I
    /// broadcast in the double-threshold schemes. The reference ODS scheme
    /// always counts the forwarding device only.
    pub eve_hears_broadcast: bool,
}

impl Scenario {
    /// Identical devices with the distance case's link variances, unit
    /// direct and eavesdropper variances, `P_t = 1` and `N0` set from
    /// `snr_db = 10 log10(P_t / N0)`.
    pub fn from_case(case: DistanceCase, n_devices: usize, thresholds: Thresholds, snr_db: f64) -> Self {
        let device = DeviceVariances {
            source_to_device: case.sigma_sd_sq(),
            device_to_end: case.sigma_de_sq(),
            device_to_eve: 1.0,
        };
        Self {
            case,
            devices: vec![device; n_devices],
            thresholds,
            p_total: 1.0,
            n0: 1.0 / db_to_linear(snr_db),
            direct_variance: 1.0,
            eve_source_variance: 1.0,
            direct_path: None,
            combine: CombineMode::AllPassing,
            eve_hears_broadcast: true,
        }
    }

    pub fn n_devices(&self) -> usize {
        self.devices.len()
    }

    pub fn uses_direct_path(&self, scheme: SchemeKind) -> bool {
        match scheme {
            SchemeKind::DirectOnly => true,
            SchemeKind::OdsNoThreshold => false,
            _ => self.direct_path.unwrap_or(scheme.default_direct_path()),
        }
    }

    /// Power split for `scheme`: direct transmission spends the whole budget
    /// at the source.
    pub fn allocation(&self, scheme: SchemeKind) -> Result<PowerAllocation> {
        if scheme == SchemeKind::DirectOnly {
            PowerAllocation::direct(self.p_total)
        } else {
            allocate_power(&self.case, self.p_total, self.n_devices())
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Configuration(format!("{name} must be positive and finite, got {v}")))
            }
        };
        if self.devices.is_empty() {
            return Err(Error::Configuration("at least one device is required".into()));
        }
        positive("p_total", self.p_total)?;
        positive("n0", self.n0)?;
        positive("direct_variance", self.direct_variance)?;
        positive("eve_source_variance", self.eve_source_variance)?;
        for (i, d) in self.devices.iter().enumerate() {
            positive(&format!("device {i} source_to_device"), d.source_to_device)?;
            positive(&format!("device {i} device_to_end"), d.device_to_end)?;
            positive(&format!("device {i} device_to_eve"), d.device_to_eve)?;
        }
        Ok(())
    }
}

/// One joint draw of every link in the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub source: SourceLinks,
    pub devices: DeviceLinks,
}

impl Realization {
    pub fn empty() -> Self {
        let zero = LinkGain { coefficient: ComplexSample::new(0.0, 0.0), variance: 1.0 };
        Self {
            source: SourceLinks { to_end_device: zero, to_devices: Vec::new(), to_eavesdropper: zero },
            devices: DeviceLinks { to_end_device: Vec::new(), to_eavesdropper: Vec::new() },
        }
    }
}

impl Scenario {
    pub fn draw_links<R: Rng + ?Sized>(&self, rng: &mut R) -> Realization {
        let mut out = Realization::empty();
        self.draw_links_into(rng, &mut out);
        out
    }

    /// Redraws every link into `out`, reusing its buffers. The draw order is
    /// fixed (direct, source-eavesdropper, then per device: source-device,
    /// device-end, device-eavesdropper) so every scheme sees the same
    /// channels from the same stream.
    pub fn draw_links_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Realization) {
        let mut link = |variance: f64| LinkGain { coefficient: complex_gaussian(rng, variance), variance };
        out.source.to_end_device = link(self.direct_variance);
        out.source.to_eavesdropper = link(self.eve_source_variance);
        out.source.to_devices.clear();
        out.devices.to_end_device.clear();
        out.devices.to_eavesdropper.clear();
        for d in &self.devices {
            out.source.to_devices.push(link(d.source_to_device));
            out.devices.to_end_device.push(link(d.device_to_end));
            out.devices.to_eavesdropper.push(link(d.device_to_eve));
        }
    }
}
