//! Command-line flags, config files and their resolution into a run plan.
//!
//! A config file holds one `key = value` pair per line, with the flag
//! names (without dashes) as keys; blank lines and `#` comments are
//! ignored. Flags override file values, and `SIDELINK_SIM_SEED` supplies
//! the seed when neither does.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;
use sidelink_core::engine::{case_thresholds, CombineMode, ExperimentConfig};
use sidelink_core::modem::PskOrder;
use sidelink_core::selection::{SchemeKind, Thresholds};
use sidelink_core::topology::{case_variances, CaseId, FREE_SPACE_EXPONENT};

use crate::CliError;

pub const SEED_ENV: &str = "SIDELINK_SIM_SEED";
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Default, Parser)]
#[command(name = "sidelink-sim", version, about = "BER and intercept-probability sweeps for double-threshold device selection")]
pub struct Args {
    /// Flat `key = value` file; flags override its values
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// fig2 | fig3 | fig4 | fig5 | fig6 | fig7
    #[arg(long)]
    pub preset: Option<String>,
    /// direct | ods | pods-a | pods-p (default: all four)
    #[arg(long)]
    pub scheme: Option<String>,
    /// Distance case 1, 2 or 3
    #[arg(long)]
    pub case: Option<String>,
    /// Number of candidate devices
    #[arg(long, value_name = "N")]
    pub devices: Option<String>,
    /// bpsk | qpsk | 8psk | 16psk
    #[arg(long = "mod", value_name = "MOD")]
    pub modulation: Option<String>,
    /// First grid point of P_t/N0 [default: 0]
    #[arg(long, value_name = "DB", allow_negative_numbers = true)]
    pub snr_start: Option<String>,
    /// Last grid point of P_t/N0 [default: 40]
    #[arg(long, value_name = "DB", allow_negative_numbers = true)]
    pub snr_stop: Option<String>,
    /// Grid spacing [default: 2]
    #[arg(long, value_name = "DB")]
    pub snr_step: Option<String>,
    /// Bits per SNR point
    #[arg(long)]
    pub bits: Option<String>,
    /// Channel draws per point of an intercept sweep
    #[arg(long)]
    pub trials: Option<String>,
    /// Master seed; falls back to SIDELINK_SIM_SEED, then 1
    #[arg(long)]
    pub seed: Option<String>,
    /// Input threshold on the source-to-device SNR
    #[arg(long, value_name = "DB", allow_negative_numbers = true)]
    pub in_thresh_db: Option<String>,
    /// Output threshold on each branch at the end device
    #[arg(long, value_name = "DB", allow_negative_numbers = true)]
    pub out_thresh_db: Option<String>,
    /// all | best
    #[arg(long)]
    pub combine: Option<String>,
    /// Source-to-end-device channel variance (default: collinear free-space geometry)
    #[arg(long, value_name = "VAR")]
    pub direct_var: Option<String>,
    /// Whether the eavesdropper also hears the source broadcast in intercept sweeps [default: true]
    #[arg(long, value_name = "BOOL")]
    pub eve_broadcast: Option<String>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<String>,
}

const KEYS: [&str; 17] = [
    "preset",
    "scheme",
    "case",
    "devices",
    "mod",
    "snr-start",
    "snr-stop",
    "snr-step",
    "bits",
    "trials",
    "seed",
    "in-thresh-db",
    "out-thresh-db",
    "combine",
    "direct-var",
    "eve-broadcast",
    "out",
];

/// Keys a preset fixes itself.
const PRESET_KEYS: [&str; 6] = ["scheme", "case", "devices", "mod", "in-thresh-db", "out-thresh-db"];

impl Args {
    /// Merged settings: config file first, then flags on top.
    pub fn settings(&self) -> Result<BTreeMap<String, String>, CliError> {
        let mut map = match &self.config {
            Some(path) => parse_config_file(path)?,
            None => BTreeMap::new(),
        };
        let flags = [
            ("preset", &self.preset),
            ("scheme", &self.scheme),
            ("case", &self.case),
            ("devices", &self.devices),
            ("mod", &self.modulation),
            ("snr-start", &self.snr_start),
            ("snr-stop", &self.snr_stop),
            ("snr-step", &self.snr_step),
            ("bits", &self.bits),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("in-thresh-db", &self.in_thresh_db),
            ("out-thresh-db", &self.out_thresh_db),
            ("combine", &self.combine),
            ("direct-var", &self.direct_var),
            ("eve-broadcast", &self.eve_broadcast),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                map.insert(key.to_string(), v.clone());
            }
        }
        Ok(map)
    }
}

pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_text(&text).map_err(|msg| CliError::Usage(format!("{}: {msg}", path.display())))
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(format!("line {}: unknown key '{key}'", n + 1));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl Preset {
    pub const ALL: [Preset; 6] = [Self::Fig2, Self::Fig3, Self::Fig4, Self::Fig5, Self::Fig6, Self::Fig7];
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = Self::ALL.iter().position(|p| p == self).expect("listed") + 2;
        write!(f, "fig{n}")
    }
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|p| p.to_string() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| CliError::Usage(format!("unknown preset '{s}' (expected fig2 to fig7)")))
    }
}

/// Settings shared by presets and explicit runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub n_bits: u64,
    pub trials: u64,
    pub snr_grid_db: Vec<f64>,
    /// `None` keeps each preset's own choice.
    pub combine: Option<CombineMode>,
    pub direct_variance: Option<f64>,
    pub eve_hears_broadcast: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            n_bits: 100_000,
            trials: 100_000,
            snr_grid_db: snr_grid(0.0, 40.0, 2.0).expect("valid default grid"),
            combine: None,
            direct_variance: None,
            eve_hears_broadcast: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    /// One BER curve per config over its SNR grid.
    Ber(Vec<ExperimentConfig>),
    /// One intercept curve per config over `lambda_grid_db`.
    Intercept { configs: Vec<ExperimentConfig>, lambda_grid_db: Vec<f64>, trials: u64 },
}

impl Job {
    pub fn configs(&self) -> &[ExperimentConfig] {
        match self {
            Self::Ber(c) | Self::Intercept { configs: c, .. } => c,
        }
    }
}

/// Main-to-eavesdropper gain ratios of the intercept preset.
pub fn lambda_grid_db() -> Vec<f64> {
    (0..=10).map(|i| -5.0 + 2.0 * i as f64).collect()
}

/// Experiment config for one curve with `opts` applied.
pub fn curve(scheme: SchemeKind, case_id: CaseId, opts: &RunOptions) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(scheme, case_id);
    c.n_bits = opts.n_bits;
    c.snr_grid_db = opts.snr_grid_db.clone();
    c.master_seed = opts.seed;
    if let Some(m) = opts.combine {
        c.combine = m;
    }
    if let Some(v) = opts.direct_variance {
        c.direct_variance = v;
    }
    c.eve_hears_broadcast = opts.eve_hears_broadcast;
    c
}

impl Preset {
    pub fn job(self, opts: &RunOptions) -> Job {
        use SchemeKind::*;
        let relayed = [OdsNoThreshold, PodsA, PodsP];
        let all_four = |case_id| SchemeKind::ALL.iter().map(|&s| curve(s, case_id, opts)).collect();
        match self {
            Self::Fig2 => Job::Ber(all_four(CaseId::CaseI)),
            Self::Fig3 => Job::Ber(all_four(CaseId::CaseII)),
            Self::Fig4 => Job::Ber(all_four(CaseId::CaseIII)),
            Self::Fig5 => Job::Ber(
                [PskOrder::Psk8, PskOrder::Psk16]
                    .into_iter()
                    .flat_map(|m| {
                        relayed.map(|s| {
                            let k = m.bits_per_symbol() as u64;
                            ExperimentConfig { modulation: m, n_bits: opts.n_bits.div_ceil(k) * k, ..curve(s, CaseId::CaseI, opts) }
                        })
                    })
                    .collect(),
            ),
            Self::Fig6 => Job::Ber(
                [5, 10]
                    .into_iter()
                    .flat_map(|n| relayed.map(|s| ExperimentConfig { n_devices: n, ..curve(s, CaseId::CaseI, opts) }))
                    .collect(),
            ),
            Self::Fig7 => Job::Intercept {
                configs: [DirectOnly, PodsA, PodsP].map(|s| curve(s, CaseId::CaseI, opts)).to_vec(),
                lambda_grid_db: lambda_grid_db(),
                trials: opts.trials,
            },
        }
    }
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    /// File stem of the results file.
    pub name: String,
    pub out_dir: PathBuf,
    pub job: Job,
    /// Effective settings, recorded in the results file.
    pub effective: BTreeMap<String, String>,
}

impl RunPlan {
    pub fn csv_path(&self) -> PathBuf {
        self.out_dir.join(format!("{}.csv", self.name))
    }
}

pub fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite()) {
        return Err(CliError::Usage(format!("invalid SNR grid {start}:{stop}:{step}")));
    }
    if start > stop {
        return Err(CliError::Usage(format!("SNR start {start} exceeds stop {stop}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

fn parse_value<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    map.get(key)
        .map(|v| v.trim().parse::<T>().map_err(|_| CliError::Usage(format!("invalid value '{v}' for --{key}"))))
        .transpose()
}

fn parse_named<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    map.get(key)
        .map(|v| v.parse::<T>().map_err(|_| CliError::Usage(format!("unknown {key} '{v}'"))))
        .transpose()
}

fn parse_combine(s: &str) -> Result<CombineMode, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "all" => Ok(CombineMode::AllPassing),
        "best" => Ok(CombineMode::Best),
        _ => Err(CliError::Usage(format!("unknown combine '{s}' (expected all or best)"))),
    }
}

fn combine_name(m: CombineMode) -> &'static str {
    match m {
        CombineMode::AllPassing => "all",
        CombineMode::Best => "best",
    }
}

/// Resolves merged settings into a validated plan. `env_seed` is the value
/// of `SIDELINK_SIM_SEED`, consulted only when no seed was given.
pub fn resolve(map: &BTreeMap<String, String>, env_seed: Option<String>) -> Result<RunPlan, CliError> {
    let mut eff = BTreeMap::new();
    let preset: Option<Preset> = map.get("preset").map(|s| s.parse()).transpose()?;

    let seed = match map.get("seed").cloned().or(env_seed) {
        Some(s) => s.trim().parse().map_err(|_| CliError::Usage(format!("invalid seed '{s}'")))?,
        None => DEFAULT_SEED,
    };
    let defaults = RunOptions::default();
    let start = parse_value(map, "snr-start")?.unwrap_or(0.0);
    let stop = parse_value(map, "snr-stop")?.unwrap_or(40.0);
    let step = parse_value(map, "snr-step")?.unwrap_or(2.0);
    let opts = RunOptions {
        seed,
        n_bits: parse_value(map, "bits")?.unwrap_or(defaults.n_bits),
        trials: parse_value(map, "trials")?.unwrap_or(defaults.trials),
        snr_grid_db: snr_grid(start, stop, step)?,
        combine: map.get("combine").map(|s| parse_combine(s)).transpose()?,
        direct_variance: parse_value(map, "direct-var")?,
        eve_hears_broadcast: parse_value(map, "eve-broadcast")?.unwrap_or(true),
    };
    eff.insert("seed".to_string(), seed.to_string());
    eff.insert("snr-start".to_string(), start.to_string());
    eff.insert("snr-stop".to_string(), stop.to_string());
    eff.insert("snr-step".to_string(), step.to_string());
    if let Some(v) = opts.direct_variance {
        eff.insert("direct-var".to_string(), v.to_string());
    }
    let out_dir = PathBuf::from(map.get("out").map_or(".", String::as_str));
    eff.insert("out".to_string(), out_dir.display().to_string());

    let (name, job) = match preset {
        Some(p) => {
            if let Some(k) = PRESET_KEYS.iter().find(|k| map.contains_key(**k)) {
                return Err(CliError::Usage(format!("--{k} cannot be combined with --preset {p}")));
            }
            eff.insert("preset".to_string(), p.to_string());
            if let Some(m) = opts.combine {
                eff.insert("combine".to_string(), combine_name(m).to_string());
            }
            let job = p.job(&opts);
            match &job {
                Job::Ber(_) => eff.insert("bits".to_string(), opts.n_bits.to_string()),
                Job::Intercept { .. } => {
                    eff.insert("eve-broadcast".to_string(), opts.eve_hears_broadcast.to_string());
                    eff.insert("trials".to_string(), opts.trials.to_string())
                }
            };
            (p.to_string(), job)
        }
        None => {
            let case_id: CaseId = parse_named(map, "case")?.unwrap_or(CaseId::CaseI);
            let schemes = match parse_named::<SchemeKind>(map, "scheme")? {
                Some(s) => vec![s],
                None => SchemeKind::ALL.to_vec(),
            };
            let modulation: PskOrder = parse_named(map, "mod")?.unwrap_or(PskOrder::Bpsk);
            let n_devices: usize = parse_value(map, "devices")?.unwrap_or(5);
            let base = case_thresholds(case_id);
            let thresholds = Thresholds::new(
                parse_value(map, "in-thresh-db")?.unwrap_or(base.input_db()),
                parse_value(map, "out-thresh-db")?.unwrap_or(base.output_db()),
            )
            .map_err(CliError::Config)?;
            let configs: Vec<_> = schemes
                .iter()
                .map(|&s| ExperimentConfig { modulation, n_devices, thresholds, ..curve(s, case_id, &opts) })
                .collect();
            if let Some(s) = map.get("scheme") {
                eff.insert("scheme".to_string(), s.trim().to_string());
            }
            let combine = opts.combine.unwrap_or(CombineMode::AllPassing);
            let direct_var = opts.direct_variance.unwrap_or(case_variances(case_id).collinear_direct_variance(FREE_SPACE_EXPONENT));
            for (k, v) in [
                ("case", case_id.to_string()),
                ("mod", modulation.to_string()),
                ("devices", n_devices.to_string()),
                ("in-thresh-db", thresholds.input_db().to_string()),
                ("out-thresh-db", thresholds.output_db().to_string()),
                ("bits", opts.n_bits.to_string()),
                ("combine", combine_name(combine).to_string()),
                ("direct-var", direct_var.to_string()),
            ] {
                eff.insert(k.to_string(), v);
            }
            ("sweep".to_string(), Job::Ber(configs))
        }
    };
    for c in job.configs() {
        c.validate().map_err(CliError::Config)?;
    }
    Ok(RunPlan { name, out_dir, job, effective: eff })
}
