//! Secrecy capacity, closed-form intercept probabilities and a Monte Carlo
//! intercept estimator.
//!
//! An interception happens when the eavesdropper's capacity strictly exceeds
//! the legitimate link's. Capacities are `log2(1 + snr)`, so the estimator
//! compares SNRs directly.

use crate::channel::SimRng;
use crate::montecarlo::run_chunked;
use crate::relaying::af_snr;
use crate::scenario::{CombineMode, Realization, Scenario};
use crate::selection::{
    apply_input_threshold, combine_output, ods_p_metric, select_best, DeviceLinkState, SchemeKind,
};
use crate::{Error, Result};

/// Mean channel gains entering the closed-form intercept probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct WiretapStats {
    /// `E|h_S,E|^2`.
    pub rho_se_sq: f64,
    /// `E|h_S,ED|^2`.
    pub rho_sed_sq: f64,
    /// Per device `(E|h_D,E|^2, E|h_D,ED|^2)`.
    pub devices: Vec<(f64, f64)>,
}

impl WiretapStats {
    pub fn new(rho_se_sq: f64, rho_sed_sq: f64, devices: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |v: f64| !(v > 0.0 && v.is_finite());
        if bad(rho_se_sq) || bad(rho_sed_sq) || devices.iter().any(|&(a, b)| bad(a) || bad(b)) {
            return Err(Error::Parameter("wiretap variances must be positive and finite".into()));
        }
        if devices.is_empty() {
            return Err(Error::Parameter("at least one device is required".into()));
        }
        Ok(Self { rho_se_sq, rho_sed_sq, devices })
    }

    /// `m` identical devices.
    pub fn symmetric(rho_se_sq: f64, rho_sed_sq: f64, rho_de_sq: f64, rho_ded_sq: f64, m: usize) -> Result<Self> {
        Self::new(rho_se_sq, rho_sed_sq, vec![(rho_de_sq, rho_ded_sq); m])
    }

    pub fn m_devices(&self) -> usize {
        self.devices.len()
    }
}

/// Main-link minus wiretap-link capacity of direct transmission, in
/// bits per channel use. Negative values mean the eavesdropper's link is
/// the stronger one.
pub fn secrecy_capacity_direct(gain_sed_sq: f64, gain_se_sq: f64, p_total: f64, n0: f64) -> f64 {
    let main = (1.0 + gain_sed_sq * p_total / n0).log2();
    let wiretap = (1.0 + gain_se_sq * p_total / n0).log2();
    main - wiretap
}

pub fn intercept_probability_direct(stats: &WiretapStats) -> f64 {
    stats.rho_se_sq / (stats.rho_se_sq + stats.rho_sed_sq)
}

/// Intercept probability of wiretap-aware single-device selection: every
/// device must be intercepted, so the per-device odds multiply.
pub fn intercept_probability_ods(stats: &WiretapStats) -> f64 {
    stats.devices.iter().map(|&(eve, end)| eve / (eve + end)).product()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterceptEstimate {
    /// Sweep variable (dB) this estimate belongs to.
    pub x_value: f64,
    pub estimate: f64,
    pub intercepted: u64,
    pub trials: u64,
    pub half_width_95: f64,
    pub seed: u64,
}

impl InterceptEstimate {
    pub fn from_counts(x_value: f64, intercepted: u64, trials: u64, seed: u64) -> Self {
        Self {
            x_value,
            estimate: intercepted as f64 / trials as f64,
            intercepted,
            trials,
            half_width_95: half_width_95(intercepted, trials),
            seed,
        }
    }

    /// Binomial standard error of the estimate.
    pub fn std_error(&self) -> f64 {
        (self.estimate * (1.0 - self.estimate) / self.trials as f64).sqrt()
    }

    pub fn lower(&self) -> f64 {
        (self.estimate - self.half_width_95).max(0.0)
    }

    pub fn upper(&self) -> f64 {
        (self.estimate + self.half_width_95).min(1.0)
    }
}

/// 95% half-width from the Agresti-Coull adjusted proportion; stays
/// positive when every trial agrees.
fn half_width_95(successes: u64, trials: u64) -> f64 {
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64 + Z * Z;
    let p = (successes as f64 + 0.5 * Z * Z) / n;
    Z * (p * (1.0 - p) / n).sqrt()
}

/// Legitimate and eavesdropper SNRs of one trial.
fn trial_snrs(scheme: SchemeKind, scenario: &Scenario, links: &Realization, p_source: f64, p_device: f64) -> (f64, f64) {
    let n0 = scenario.n0;
    let direct_main = p_source * links.source.to_end_device.power() / n0;
    let direct_eve = p_source * links.source.to_eavesdropper.power() / n0;
    if scheme == SchemeKind::DirectOnly {
        return (direct_main, direct_eve);
    }

    let states: Vec<DeviceLinkState> = (0..scenario.n_devices())
        .map(|i| DeviceLinkState {
            index: i,
            snr_sd: p_source * links.source.to_devices[i].power() / n0,
            gain_sd_sq: links.source.to_devices[i].power(),
            gain_de_sq: links.devices.to_end_device[i].power(),
            gain_eve_sq: links.devices.to_eavesdropper[i].power(),
            selected_input: false,
            survived_output: false,
        })
        .collect();
    let hop = |gain: f64| p_device * gain / n0;

    if scheme == SchemeKind::OdsNoThreshold {
        // reference ODS: wiretap-aware choice among all devices, no thresholds
        let best = states
            .iter()
            .map(|s| (s.index, ods_p_metric(s, p_source, n0)))
            .min_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)))
            .map(|(i, _)| &states[i])
            .expect("scenario has at least one device");
        return (af_snr(best.snr_sd, hop(best.gain_de_sq)), af_snr(best.snr_sd, hop(best.gain_eve_sq)));
    }

    let states: Vec<_> = states.into_iter().map(|s| apply_input_threshold(s, &scenario.thresholds)).collect();
    let mut forwarding = select_best(&states, scheme, p_source, n0);
    if scenario.combine == CombineMode::Best {
        forwarding.truncate(1);
    }
    let relayed: Vec<f64> = forwarding.iter().map(|&i| af_snr(states[i].snr_sd, hop(states[i].gain_de_sq))).collect();
    let direct = scenario.uses_direct_path(scheme).then_some(direct_main);
    let legit = combine_output(direct, &relayed, &scenario.thresholds).snr;

    let mut eve: f64 = forwarding.iter().map(|&i| af_snr(states[i].snr_sd, hop(states[i].gain_eve_sq))).sum();
    if scenario.eve_hears_broadcast {
        eve += direct_eve;
    }
    (legit, eve)
}

/// Monte Carlo intercept probability of `scheme` over `trials` independent
/// channel draws seeded by `seed`.
///
/// The eavesdropper combines everything it overhears without thresholds.
/// In the double-threshold schemes it overhears the forwarding devices and,
/// when `eve_hears_broadcast` is set, the Phase-I broadcast; the legitimate
/// link is whatever survives the output threshold at the end device. The
/// reference ODS scheme picks the device with the best main-to-wiretap
/// ratio and is intercepted when that device's wiretap hop is stronger.
pub fn estimate_intercept_mc(scheme: SchemeKind, scenario: &Scenario, trials: u64, seed: u64) -> Result<InterceptEstimate> {
    if trials == 0 {
        return Err(Error::Parameter("at least one trial is required".into()));
    }
    scenario.validate()?;
    let alloc = scenario.allocation(scheme)?;
    let [intercepted] = run_chunked(seed, trials, |rng: &mut SimRng, n| {
        let mut links = Realization::empty();
        let mut hits = 0;
        for _ in 0..n {
            scenario.draw_links_into(rng, &mut links);
            let (legit, eve) = trial_snrs(scheme, scenario, &links, alloc.p_source, alloc.p_device);
            if eve > legit {
                hits += 1;
            }
        }
        [hits]
    });
    Ok(InterceptEstimate::from_counts(0.0, intercepted, trials, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::Thresholds;
    use crate::topology::{case_variances, CaseId};
    use proptest::prelude::*;

    #[test]
    fn secrecy_capacity_examples() {
        assert_eq!(secrecy_capacity_direct(0.7, 0.7, 1.0, 0.1), 0.0);
        assert!((secrecy_capacity_direct(3.0, 1.0, 1.0, 1.0) - 1.0).abs() < 1e-15);
        assert_eq!(secrecy_capacity_direct(2.0, 0.0, 1.0, 0.5), 5f64.log2());
        assert!(secrecy_capacity_direct(0.1, 2.0, 1.0, 0.5) < 0.0);
    }

    #[test]
    fn direct_intercept_examples() {
        let s = WiretapStats::symmetric(1.0, 1.0, 1.0, 1.0, 1).unwrap();
        assert_eq!(intercept_probability_direct(&s), 0.5);
        let s = WiretapStats::symmetric(1.0, 9.0, 1.0, 1.0, 1).unwrap();
        assert!((intercept_probability_direct(&s) - 0.1).abs() < 1e-15);
        let s = WiretapStats::symmetric(1e-12, 1.0, 1.0, 1.0, 1).unwrap();
        assert!(intercept_probability_direct(&s) < 1e-11);
    }

    #[test]
    fn ods_intercept_examples() {
        let s = WiretapStats::symmetric(1.0, 1.0, 1.0, 1.0, 5).unwrap();
        assert_eq!(intercept_probability_ods(&s), 0.03125);
        let s = WiretapStats::symmetric(1.0, 1.0, 2.0, 3.0, 1).unwrap();
        assert!((intercept_probability_ods(&s) - 0.4).abs() < 1e-15);
        let s = WiretapStats::symmetric(1.0, 1.0, 1.0, 10.0, 5).unwrap();
        assert!((intercept_probability_ods(&s) - 11f64.powi(-5)).abs() < 1e-18);
        assert!((intercept_probability_ods(&s) - 6.21e-6).abs() < 1e-8);
    }

    #[test]
    fn invalid_stats_rejected() {
        assert!(WiretapStats::new(0.0, 1.0, vec![(1.0, 1.0)]).is_err());
        assert!(WiretapStats::new(1.0, 1.0, vec![]).is_err());
        assert!(WiretapStats::new(1.0, 1.0, vec![(1.0, -1.0)]).is_err());
    }

    fn case_one(m: usize) -> Scenario {
        Scenario::from_case(case_variances(CaseId::CaseI), m, Thresholds::new(5.0, 5.0).unwrap(), 20.0)
    }

    #[test]
    fn mc_direct_symmetric() {
        let e = estimate_intercept_mc(SchemeKind::DirectOnly, &case_one(5), 1_000_000, 1).unwrap();
        assert!((e.estimate - 0.5).abs() < 0.002, "{e:?}");
    }

    #[test]
    fn mc_ods_symmetric() {
        let e = estimate_intercept_mc(SchemeKind::OdsNoThreshold, &case_one(5), 1_000_000, 2).unwrap();
        let se = (0.03125f64 * (1.0 - 0.03125) / 1e6).sqrt();
        assert!((e.estimate - 0.03125).abs() < 3.0 * se, "{e:?}");
    }

    #[test]
    fn single_trial_is_degenerate_but_bounded() {
        let e = estimate_intercept_mc(SchemeKind::DirectOnly, &case_one(5), 1, 3).unwrap();
        assert!(e.estimate == 0.0 || e.estimate == 1.0);
        assert!(e.half_width_95 > 0.3);
        assert!(e.lower() >= 0.0 && e.upper() <= 1.0);
        assert!(estimate_intercept_mc(SchemeKind::DirectOnly, &case_one(5), 0, 3).is_err());
    }

    #[test]
    fn mc_is_reproducible() {
        let s = case_one(5);
        let a = estimate_intercept_mc(SchemeKind::PodsP, &s, 50_000, 4).unwrap();
        let b = estimate_intercept_mc(SchemeKind::PodsP, &s, 50_000, 4).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn ods_intercept_non_increasing_in_m(
            ratios in proptest::collection::vec((0.01f64..10.0, 0.01f64..10.0), 2..20),
        ) {
            let mut prev = 1.0;
            for m in 1..=ratios.len() {
                let s = WiretapStats::new(1.0, 1.0, ratios[..m].to_vec()).unwrap();
                let p = intercept_probability_ods(&s);
                prop_assert!(p <= prev);
                prop_assert!(p > 0.0 && p < 1.0);
                prev = p;
            }
        }

        #[test]
        fn direct_intercept_in_open_unit_interval(a in 1e-6f64..1e6, b in 1e-6f64..1e6) {
            let p = intercept_probability_direct(&WiretapStats::symmetric(a, b, 1.0, 1.0, 1).unwrap());
            prop_assert!(p > 0.0 && p < 1.0);
        }
    }
}
