//! Monte Carlo experiment driver: BER per SNR point, SNR sweeps and
//! intercept-probability sweeps.
//!
//! The SNR axis is `P_t / N0` in dB with `P_t = 1`. Each symbol draws fresh
//! channels (fast fading), runs both transmission phases, applies the
//! scheme's selection and combining, equalizes the combined observation with
//! perfect CSI and counts bit errors. Symbols for which no branch survives
//! the output threshold are decided from noise alone and counted as outages.

use rand::Rng;

pub use crate::scenario::CombineMode;
pub use crate::security::InterceptEstimate;

use crate::channel::{complex_gaussian, derive_seed, ComplexSample, SimRng};
use crate::modem::PskOrder;
use crate::montecarlo::run_chunked;
use crate::relaying::{amplification_factor, Branch};
use crate::scenario::{Realization, Scenario};
use crate::security::estimate_intercept_mc;
use crate::selection::{
    apply_input_threshold, combine_into, rank_into, Combined, DeviceLinkState, SchemeKind, Thresholds,
};
use crate::topology::{case_variances, CaseId, DistanceCase, PowerAllocation, FREE_SPACE_EXPONENT};
use crate::{Error, Result};

/// Stream tags separating BER and intercept sub-seeds.
const BER_TAG: u64 = 0xbe;
const INTERCEPT_TAG: u64 = 0x1c;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scheme: SchemeKind,
    pub case: DistanceCase,
    pub n_devices: usize,
    pub modulation: PskOrder,
    pub thresholds: Thresholds,
    /// Strictly increasing `P_t / N0` values in dB.
    pub snr_grid_db: Vec<f64>,
    pub n_bits: u64,
    pub master_seed: u64,
    pub combine: CombineMode,
    /// `None` follows the scheme default (direct link used by `PodsP` and
    /// `DirectOnly` only).
    pub direct_path: Option<bool>,
    /// `E|h_S,ED|^2`.
    pub direct_variance: f64,
    /// `E|h_S,E|^2`.
    pub eve_source_variance: f64,
    /// `E|h_D,E|^2` for every device.
    pub eve_device_variance: f64,
    /// Operating point of intercept sweeps.
    pub intercept_snr_db: f64,
    /// Whether intercept sweeps let the eavesdropper combine the source
    /// broadcast with the forwarded copies.
    pub eve_hears_broadcast: bool,
}

/// Default `(input, output)` thresholds in dB for each distance case.
///
/// Case III uses a high input threshold because the devices sit close to
/// the source.
pub fn case_thresholds(case_id: CaseId) -> Thresholds {
    let (input, output) = match case_id {
        CaseId::CaseI => (5.0, 5.0),
        CaseId::CaseII => (5.0, 10.0),
        CaseId::CaseIII => (10.0, 5.0),
    };
    Thresholds::new(input, output).expect("finite thresholds")
}

impl ExperimentConfig {
    /// Defaults: 5 devices, BPSK, the case's thresholds, `10^5` bits, a
    /// 0 to 40 dB grid in 2 dB steps, all passing devices forwarding, and a
    /// direct link as strong as the collinear free-space geometry implies.
    /// Eavesdropper links have unit variance and the eavesdropper hears both
    /// transmission phases.
    pub fn new(scheme: SchemeKind, case_id: CaseId) -> Self {
        let case = case_variances(case_id);
        Self {
            scheme,
            case,
            n_devices: 5,
            modulation: PskOrder::Bpsk,
            thresholds: case_thresholds(case_id),
            snr_grid_db: (0..=20).map(|i| 2.0 * i as f64).collect(),
            n_bits: 100_000,
            master_seed: 0,
            combine: CombineMode::AllPassing,
            direct_path: None,
            direct_variance: case.collinear_direct_variance(FREE_SPACE_EXPONENT),
            eve_source_variance: 1.0,
            eve_device_variance: 1.0,
            intercept_snr_db: 20.0,
            eve_hears_broadcast: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Configuration(msg));
        if self.n_devices == 0 {
            return cfg("n_devices must be at least 1".into());
        }
        if self.n_bits == 0 {
            return cfg("n_bits must be at least 1".into());
        }
        let k = self.modulation.bits_per_symbol() as u64;
        if !self.n_bits.is_multiple_of(k) {
            return cfg(format!("{} bits is not a multiple of {k} bits per {} symbol", self.n_bits, self.modulation));
        }
        if self.snr_grid_db.iter().any(|x| !x.is_finite()) {
            return cfg("SNR grid values must be finite".into());
        }
        if self.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return cfg("SNR grid must be strictly increasing".into());
        }
        if !self.intercept_snr_db.is_finite() {
            return cfg("intercept SNR must be finite".into());
        }
        self.scenario(0.0)?.validate()
    }

    /// Scenario at one SNR point.
    pub fn scenario(&self, snr_db: f64) -> Result<Scenario> {
        let mut s = Scenario::from_case(self.case, self.n_devices, self.thresholds, snr_db);
        s.direct_variance = self.direct_variance;
        s.eve_source_variance = self.eve_source_variance;
        for d in &mut s.devices {
            d.device_to_eve = self.eve_device_variance;
        }
        s.direct_path = self.direct_path;
        s.combine = self.combine;
        s.eve_hears_broadcast = self.eve_hears_broadcast;
        Ok(s)
    }

    pub fn symbols(&self) -> u64 {
        self.n_bits.div_ceil(self.modulation.bits_per_symbol() as u64)
    }

    /// Sub-seed of the BER point at `snr_db`.
    pub fn point_seed(&self, snr_db: f64) -> u64 {
        derive_seed(self.master_seed, &[BER_TAG, snr_db.to_bits()])
    }

    pub fn intercept_seed(&self, lambda_db: f64) -> u64 {
        derive_seed(self.master_seed, &[INTERCEPT_TAG, lambda_db.to_bits()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerEstimate {
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub ber: f64,
    pub outage_symbols: u64,
    pub symbols: u64,
    pub outage_fraction: f64,
    pub seed: u64,
}

impl BerEstimate {
    fn from_counts(snr_db: f64, bit_errors: u64, bits: u64, outage_symbols: u64, symbols: u64, seed: u64) -> Self {
        Self {
            snr_db,
            bit_errors,
            bits,
            ber: bit_errors as f64 / bits as f64,
            outage_symbols,
            symbols,
            outage_fraction: outage_symbols as f64 / symbols as f64,
            seed,
        }
    }

    /// Binomial standard error of `ber`.
    pub fn std_error(&self) -> f64 {
        (self.ber * (1.0 - self.ber) / self.bits as f64).sqrt()
    }
}

/// Per-chunk scratch space, reused across symbols.
struct Workspace {
    links: Realization,
    at_device: Vec<ComplexSample>,
    relay_noise: Vec<ComplexSample>,
    states: Vec<DeviceLinkState>,
    branches: Vec<Branch>,
    relayed_snrs: Vec<f64>,
    alphas: Vec<f64>,
    ranked: Vec<(usize, f64)>,
    combined: Combined,
    scratch: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            links: Realization::empty(),
            at_device: Vec::with_capacity(n),
            relay_noise: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
            branches: Vec::with_capacity(n),
            relayed_snrs: Vec::with_capacity(n),
            alphas: Vec::with_capacity(n),
            ranked: Vec::with_capacity(n),
            combined: Combined { snr: 0.0, direct_used: false, relays_used: Vec::with_capacity(n) },
            scratch: Vec::with_capacity(n + 1),
        }
    }
}

struct SymbolSim<'a> {
    scheme: SchemeKind,
    scenario: &'a Scenario,
    alloc: PowerAllocation,
    order: PskOrder,
    direct_path: bool,
}

impl SymbolSim<'_> {
    /// Simulates one symbol; returns `(bit errors, outage)`.
    fn run<R: Rng + ?Sized>(&self, rng: &mut R, ws: &mut Workspace) -> (u32, bool) {
        let n0 = self.scenario.n0;
        let n = self.scenario.n_devices();
        let label = rng.random::<u32>() & (self.order.order() - 1);
        let x = self.order.point(label);

        // A fixed draw order keeps schemes on common random numbers.
        self.scenario.draw_links_into(rng, &mut ws.links);
        let p_s = self.alloc.p_source;
        let tx = p_s.sqrt() * x;
        let h_direct = ws.links.source.to_end_device;
        let y_direct = h_direct.coefficient * tx + complex_gaussian(rng, n0);
        ws.at_device.clear();
        for link in &ws.links.source.to_devices {
            ws.at_device.push(link.coefficient * tx + complex_gaussian(rng, n0));
        }
        ws.relay_noise.clear();
        for _ in 0..n {
            ws.relay_noise.push(complex_gaussian(rng, n0));
        }
        let outage_noise = complex_gaussian(rng, n0);

        let (z, outage) = if self.scheme == SchemeKind::DirectOnly {
            (h_direct.coefficient.conj() * y_direct, false)
        } else {
            match self.combine(ws, y_direct) {
                Some(z) => (z, false),
                None => (outage_noise, true),
            }
        };
        ((label ^ self.order.decide(z)).count_ones(), outage)
    }

    /// Selection, Phase II and MRC for the relayed schemes. `None` when no
    /// branch survives the output threshold.
    fn combine(&self, ws: &mut Workspace, y_direct: ComplexSample) -> Option<ComplexSample> {
        let n0 = self.scenario.n0;
        let (p_s, p_d) = (self.alloc.p_source, self.alloc.p_device);
        let thresholds = &self.scenario.thresholds;
        let links = &ws.links;

        ws.states.clear();
        for (i, sd) in links.source.to_devices.iter().enumerate() {
            let state = DeviceLinkState {
                index: i,
                snr_sd: p_s * sd.power() / n0,
                gain_sd_sq: sd.power(),
                gain_de_sq: links.devices.to_end_device[i].power(),
                gain_eve_sq: links.devices.to_eavesdropper[i].power(),
                selected_input: false,
                survived_output: false,
            };
            ws.states.push(if self.scheme.uses_thresholds() { apply_input_threshold(state, thresholds) } else { state });
        }
        rank_into(&ws.states, self.scheme, p_s, n0, &mut ws.ranked);
        if self.scheme.uses_thresholds() && self.scenario.combine == CombineMode::Best {
            ws.ranked.truncate(1);
        }

        ws.branches.clear();
        ws.relayed_snrs.clear();
        ws.alphas.clear();
        for &(i, _) in &ws.ranked {
            let sd = &links.source.to_devices[i];
            let alpha = amplification_factor(p_d, p_s, sd.power(), n0).expect("validated powers and noise");
            let branch = Branch::relayed(p_s, alpha, sd, &links.devices.to_end_device[i], n0);
            ws.relayed_snrs.push(branch.snr());
            ws.branches.push(branch);
            ws.alphas.push(alpha);
        }
        let direct = Branch::direct(p_s, &links.source.to_end_device, n0);
        let direct_snr = self.direct_path.then(|| direct.snr());
        let floor = if self.scheme.uses_thresholds() { thresholds.output_linear() } else { 0.0 };
        combine_into(direct_snr, &ws.relayed_snrs, floor, &mut ws.combined, &mut ws.scratch);
        if ws.combined.outage() {
            return None;
        }

        let mut z = ComplexSample::new(0.0, 0.0);
        if ws.combined.direct_used {
            z += direct.mrc_weight() * y_direct;
        }
        for (k, &(i, _)) in ws.ranked.iter().enumerate() {
            if ws.combined.relays_used[k] {
                let y = links.devices.to_end_device[i].coefficient * (ws.alphas[k] * ws.at_device[i]) + ws.relay_noise[i];
                z += ws.branches[k].mrc_weight() * y;
            }
        }
        Some(z)
    }
}

/// Simulates `config.n_bits` bits at one SNR point.
pub fn run_ber_point(config: &ExperimentConfig, snr_db: f64) -> Result<BerEstimate> {
    config.validate()?;
    if !snr_db.is_finite() {
        return Err(Error::Configuration(format!("SNR must be finite, got {snr_db}")));
    }
    let scenario = config.scenario(snr_db)?;
    let sim = SymbolSim {
        scheme: config.scheme,
        alloc: scenario.allocation(config.scheme)?,
        direct_path: scenario.uses_direct_path(config.scheme),
        scenario: &scenario,
        order: config.modulation,
    };
    let seed = config.point_seed(snr_db);
    let symbols = config.symbols();
    let [errors, outages] = run_chunked(seed, symbols, |rng: &mut SimRng, n| {
        let mut ws = Workspace::new(scenario.n_devices());
        let (mut errors, mut outages) = (0u64, 0u64);
        for _ in 0..n {
            let (e, o) = sim.run(rng, &mut ws);
            errors += e as u64;
            outages += o as u64;
        }
        [errors, outages]
    });
    let bits = symbols * config.modulation.bits_per_symbol() as u64;
    Ok(BerEstimate::from_counts(snr_db, errors, bits, outages, symbols, seed))
}

/// One [`BerEstimate`] per grid point, in grid order.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<BerEstimate>> {
    config.validate()?;
    config
        .snr_grid_db
        .iter()
        .map(|&snr| run_ber_point(config, snr).map_err(|e| Error::Point { x_db: snr, source: Box::new(e) }))
        .collect()
}

/// Intercept probability versus the main-to-eavesdropper gain ratio
/// `lambda` (dB) at `config.intercept_snr_db`.
///
/// The legitimate link variances stay fixed; the eavesdropper's source and
/// device link variances are divided by `lambda`.
pub fn run_intercept_sweep(config: &ExperimentConfig, lambda_grid_db: &[f64], trials: u64) -> Result<Vec<InterceptEstimate>> {
    config.validate()?;
    if trials < 1000 {
        return Err(Error::Configuration(format!("intercept sweeps need at least 1000 trials, got {trials}")));
    }
    lambda_grid_db
        .iter()
        .map(|&lambda_db| {
            let point = || -> Result<InterceptEstimate> {
                let lambda = crate::channel::db_to_linear(lambda_db);
                let mut scenario = config.scenario(config.intercept_snr_db)?;
                scenario.eve_source_variance = scenario.direct_variance / lambda;
                for d in &mut scenario.devices {
                    d.device_to_eve = d.device_to_end / lambda;
                }
                let seed = config.intercept_seed(lambda_db);
                let est = estimate_intercept_mc(config.scheme, &scenario, trials, seed)?;
                Ok(InterceptEstimate { x_value: lambda_db, ..est })
            };
            point().map_err(|e| Error::Point { x_db: lambda_db, source: Box::new(e) })
        })
        .collect()
}
