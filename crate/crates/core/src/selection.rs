//! Device selection: the input threshold at the devices, the wiretap-aware
//! (ODS-P) and wiretap-blind (ODS-A) ranking metrics, and the output
//! threshold with maximal-ratio combining at the end device.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::channel::db_to_linear;
use crate::{Error, Result};

/// Input threshold (at the devices) and output threshold (at the combiner),
/// both in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    input_db: f64,
    output_db: f64,
}

impl Thresholds {
    pub fn new(input_db: f64, output_db: f64) -> Result<Self> {
        if !input_db.is_finite() || !output_db.is_finite() {
            return Err(Error::Configuration(format!(
                "thresholds must be finite, got input {input_db} dB / output {output_db} dB"
            )));
        }
        Ok(Self { input_db, output_db })
    }

    pub fn input_db(&self) -> f64 {
        self.input_db
    }

    pub fn output_db(&self) -> f64 {
        self.output_db
    }

    pub fn input_linear(&self) -> f64 {
        db_to_linear(self.input_db)
    }

    pub fn output_linear(&self) -> f64 {
        db_to_linear(self.output_db)
    }
}

/// Per-device channel state seen by the selection logic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceLinkState {
    pub index: usize,
    /// Source-to-device instantaneous SNR (linear).
    pub snr_sd: f64,
    pub gain_sd_sq: f64,
    pub gain_de_sq: f64,
    /// Device-to-eavesdropper gain.
    pub gain_eve_sq: f64,
    pub selected_input: bool,
    pub survived_output: bool,
}

impl DeviceLinkState {
    pub fn new(index: usize, p_source: f64, n0: f64, gain_sd_sq: f64, gain_de_sq: f64, gain_eve_sq: f64) -> Result<Self> {
        Ok(Self {
            index,
            snr_sd: instantaneous_snr_sd(p_source, gain_sd_sq, n0)?,
            gain_sd_sq,
            gain_de_sq,
            gain_eve_sq,
            selected_input: false,
            survived_output: false,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Source to end device only, full power at the source.
    DirectOnly,
    /// Single best relay by the ODS-A metric, no thresholds, no direct path.
    OdsNoThreshold,
    /// Double threshold, devices ranked ignoring the wiretap link.
    PodsA,
    /// Double threshold, devices ranked by the secrecy (ODS-P) metric.
    PodsP,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] =
        [SchemeKind::DirectOnly, SchemeKind::OdsNoThreshold, SchemeKind::PodsA, SchemeKind::PodsP];

    pub fn uses_devices(self) -> bool {
        self != Self::DirectOnly
    }

    pub fn uses_thresholds(self) -> bool {
        matches!(self, Self::PodsA | Self::PodsP)
    }

    /// Whether the end device combines the direct source link by default.
    pub fn default_direct_path(self) -> bool {
        matches!(self, Self::DirectOnly | Self::PodsP)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::DirectOnly => "direct",
            Self::OdsNoThreshold => "ods",
            Self::PodsA => "pods-a",
            Self::PodsP => "pods-p",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "direct" | "direct-only" => Ok(Self::DirectOnly),
            "ods" | "ods-no-threshold" => Ok(Self::OdsNoThreshold),
            "pods-a" | "podsa" => Ok(Self::PodsA),
            "pods-p" | "podsp" => Ok(Self::PodsP),
            other => Err(Error::Parameter(format!("unknown scheme '{other}'"))),
        }
    }
}

/// `P_S |h_SD|^2 / N0`.
pub fn instantaneous_snr_sd(p_source: f64, gain_sd_sq: f64, n0: f64) -> Result<f64> {
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::Parameter(format!("noise variance must be positive, got {n0}")));
    }
    Ok(p_source * gain_sd_sq / n0)
}

/// Marks the device selected iff its source-to-device SNR reaches the input
/// threshold (equality selects).
pub fn apply_input_threshold(state: DeviceLinkState, thresholds: &Thresholds) -> DeviceLinkState {
    let selected_input = state.snr_sd >= thresholds.input_linear();
    DeviceLinkState {
        selected_input,
        survived_output: state.survived_output && selected_input,
        ..state
    }
}

/// `a b / (a + b)`, with `0/0` read as 0.
#[inline]
fn half_harmonic(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s > 0.0 {
        a * b / s
    } else {
        0.0
    }
}

/// Secrecy-aware ranking metric: ratio of the end-device and eavesdropper
/// capacity arguments of the two-hop link through this device.
pub fn ods_p_metric(state: &DeviceLinkState, p_source: f64, n0: f64) -> f64 {
    let scale = p_source / (2.0 * n0);
    let main = 1.0 + scale * half_harmonic(state.gain_sd_sq, state.gain_de_sq);
    let wiretap = 1.0 + scale * half_harmonic(state.gain_sd_sq, state.gain_eve_sq);
    main / wiretap
}

/// Wiretap-blind ranking metric `|h_SD|^2 |h_DE|^2 / (|h_SD|^2 + |h_DE|^2)`.
pub fn ods_a_metric(state: &DeviceLinkState) -> f64 {
    half_harmonic(state.gain_sd_sq, state.gain_de_sq)
}

/// Indices of the candidate devices for `scheme`, best first.
///
/// `OdsNoThreshold` returns the single best device by the ODS-A metric over
/// all devices. The double-threshold schemes rank every device that passed
/// the input threshold (ODS-A metric for `PodsA`, ODS-P for `PodsP`). Equal
/// metrics are ordered by lowest index.
pub fn select_best(states: &[DeviceLinkState], scheme: SchemeKind, p_source: f64, n0: f64) -> Vec<usize> {
    let mut ranked = Vec::with_capacity(states.len());
    rank_into(states, scheme, p_source, n0, &mut ranked);
    ranked.into_iter().map(|(i, _)| i).collect()
}

/// [`select_best`] writing `(index, metric)` pairs into a reusable buffer.
pub fn rank_into(states: &[DeviceLinkState], scheme: SchemeKind, p_source: f64, n0: f64, ranked: &mut Vec<(usize, f64)>) {
    let metric = |s: &DeviceLinkState| match scheme {
        SchemeKind::PodsP => ods_p_metric(s, p_source, n0),
        _ => ods_a_metric(s),
    };
    let by_metric = |a: &(usize, f64), b: &(usize, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
    ranked.clear();
    match scheme {
        SchemeKind::DirectOnly => {}
        SchemeKind::OdsNoThreshold => ranked.extend(states.iter().map(|s| (s.index, metric(s))).min_by(by_metric)),
        SchemeKind::PodsA | SchemeKind::PodsP => {
            ranked.extend(states.iter().filter(|s| s.selected_input).map(|s| (s.index, metric(s))));
            ranked.sort_by(by_metric);
        }
    }
}

/// Which combination of the direct and relayed links reached the detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkUsed {
    DirectAndRelayed,
    DirectOnly,
    RelayedOnly,
    Outage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Combined {
    /// Post-MRC SNR (linear); 0 in outage.
    pub snr: f64,
    pub direct_used: bool,
    /// Per relayed branch, in input order: did it pass the output threshold.
    pub relays_used: Vec<bool>,
}

impl Combined {
    pub fn outage(&self) -> bool {
        self.link_used() == LinkUsed::Outage
    }

    pub fn link_used(&self) -> LinkUsed {
        match (self.direct_used, self.relays_used.iter().any(|&u| u)) {
            (true, true) => LinkUsed::DirectAndRelayed,
            (true, false) => LinkUsed::DirectOnly,
            (false, true) => LinkUsed::RelayedOnly,
            (false, false) => LinkUsed::Outage,
        }
    }
}

/// Output threshold plus MRC: every branch whose SNR reaches the output
/// threshold is combined, the rest are dropped. `direct_snr` is `None` when
/// the scheme has no direct path.
pub fn combine_output(direct_snr: Option<f64>, relayed_snrs: &[f64], thresholds: &Thresholds) -> Combined {
    combine_above(direct_snr, relayed_snrs, thresholds.output_linear())
}

/// MRC over every branch with SNR `>= floor`; `floor = 0` combines all.
pub fn combine_above(direct_snr: Option<f64>, relayed_snrs: &[f64], floor: f64) -> Combined {
    let mut out = Combined { snr: 0.0, direct_used: false, relays_used: Vec::with_capacity(relayed_snrs.len()) };
    combine_into(direct_snr, relayed_snrs, floor, &mut out, &mut Vec::with_capacity(relayed_snrs.len() + 1));
    out
}

/// [`combine_above`] reusing `out` and a scratch buffer.
pub fn combine_into(direct_snr: Option<f64>, relayed_snrs: &[f64], floor: f64, out: &mut Combined, scratch: &mut Vec<f64>) {
    out.direct_used = direct_snr.is_some_and(|s| s >= floor);
    out.relays_used.clear();
    out.relays_used.extend(relayed_snrs.iter().map(|&s| s >= floor));
    // summing in sorted order makes the result independent of branch order
    scratch.clear();
    scratch.extend(relayed_snrs.iter().copied().filter(|&s| s >= floor));
    if out.direct_used {
        scratch.extend(direct_snr);
    }
    scratch.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    out.snr = scratch.iter().sum();
}
