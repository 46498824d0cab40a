//! CSV results files: `#` manifest comments, a fixed header and one row per
//! (curve, x value).

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use sidelink_core::engine::{BerEstimate, ExperimentConfig, InterceptEstimate};
use sidelink_core::modem::PskOrder;
use sidelink_core::selection::SchemeKind;
use sidelink_core::topology::CaseId;

use crate::CliError;

pub const HEADER: &str = "scheme,case,modulation,devices,x_kind,x_db,y_kind,y,trials,errors,outage_fraction,seed";

/// Prefix of the manifest line that changes on every run.
pub const TIMESTAMP_PREFIX: &str = "# created: ";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XKind {
    SnrDb,
    LambdaDb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YKind {
    Ber,
    InterceptProbability,
}

impl fmt::Display for XKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SnrDb => "snr_db",
            Self::LambdaDb => "lambda_db",
        })
    }
}

impl FromStr for XKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "snr_db" => Ok(Self::SnrDb),
            "lambda_db" => Ok(Self::LambdaDb),
            _ => Err(format!("unknown x_kind '{s}'")),
        }
    }
}

impl fmt::Display for YKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ber => "ber",
            Self::InterceptProbability => "intercept_probability",
        })
    }
}

impl FromStr for YKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ber" => Ok(Self::Ber),
            "intercept_probability" => Ok(Self::InterceptProbability),
            _ => Err(format!("unknown y_kind '{s}'")),
        }
    }
}

/// One data row.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub scheme: SchemeKind,
    pub case: CaseId,
    pub modulation: PskOrder,
    pub devices: usize,
    pub x_kind: XKind,
    pub x_db: f64,
    pub y_kind: YKind,
    pub y: f64,
    /// Bits for BER rows, channel draws for intercept rows.
    pub trials: u64,
    /// Bit errors or intercept events.
    pub errors: u64,
    /// Empty for intercept rows.
    pub outage_fraction: Option<f64>,
    pub seed: u64,
}

impl Record {
    pub fn ber(config: &ExperimentConfig, e: &BerEstimate) -> Self {
        Self {
            scheme: config.scheme,
            case: config.case.case_id(),
            modulation: config.modulation,
            devices: config.n_devices,
            x_kind: XKind::SnrDb,
            x_db: e.snr_db,
            y_kind: YKind::Ber,
            y: e.ber,
            trials: e.bits,
            errors: e.bit_errors,
            outage_fraction: Some(e.outage_fraction),
            seed: e.seed,
        }
    }

    pub fn intercept(config: &ExperimentConfig, e: &InterceptEstimate) -> Self {
        Self {
            scheme: config.scheme,
            case: config.case.case_id(),
            modulation: config.modulation,
            devices: config.n_devices,
            x_kind: XKind::LambdaDb,
            x_db: e.x_value,
            y_kind: YKind::InterceptProbability,
            y: e.estimate,
            trials: e.trials,
            errors: e.intercepted,
            outage_fraction: None,
            seed: e.seed,
        }
    }

    fn fields(&self) -> [String; 12] {
        [
            self.scheme.to_string(),
            self.case.to_string(),
            self.modulation.to_string(),
            self.devices.to_string(),
            self.x_kind.to_string(),
            format_sig(self.x_db),
            self.y_kind.to_string(),
            format_sig(self.y),
            self.trials.to_string(),
            self.errors.to_string(),
            self.outage_fraction.map(format_sig).unwrap_or_default(),
            self.seed.to_string(),
        ]
    }

    fn parse(fields: &csv::StringRecord) -> Result<Self, String> {
        if fields.len() != 12 {
            return Err(format!("expected 12 fields, found {}", fields.len()));
        }
        fn num<T: FromStr>(s: &str, name: &str) -> Result<T, String> {
            s.parse().map_err(|_| format!("bad {name} '{s}'"))
        }
        let outage = &fields[10];
        Ok(Self {
            scheme: fields[0].parse().map_err(|e: sidelink_core::Error| e.to_string())?,
            case: fields[1].parse().map_err(|e: sidelink_core::Error| e.to_string())?,
            modulation: fields[2].parse().map_err(|e: sidelink_core::Error| e.to_string())?,
            devices: num(&fields[3], "devices")?,
            x_kind: fields[4].parse()?,
            x_db: num(&fields[5], "x_db")?,
            y_kind: fields[6].parse()?,
            y: num(&fields[7], "y")?,
            trials: num(&fields[8], "trials")?,
            errors: num(&fields[9], "errors")?,
            outage_fraction: if outage.is_empty() { None } else { Some(num(outage, "outage_fraction")?) },
            seed: num(&fields[11], "seed")?,
        })
    }
}

/// A results file: manifest comment lines (without the leading `# `) and
/// data rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvDocument {
    pub manifest: Vec<String>,
    pub records: Vec<Record>,
}

impl CsvDocument {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for line in &self.manifest {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        for r in &self.records {
            w.write_record(r.fields()).expect("writing to memory");
        }
        out.push_str(HEADER);
        out.push('\n');
        out.push_str(std::str::from_utf8(&w.into_inner().expect("writing to memory")).expect("fields are UTF-8"));
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut manifest = Vec::new();
        let mut body = text;
        while let Some(rest) = body.strip_prefix('#') {
            let (line, tail) = rest.split_once('\n').unwrap_or((rest, ""));
            manifest.push(line.strip_prefix(' ').unwrap_or(line).to_string());
            body = tail;
        }
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let header = reader.headers().map_err(|e| e.to_string())?;
        if header.iter().collect::<Vec<_>>().join(",") != HEADER {
            return Err(format!("unexpected header '{}'", header.iter().collect::<Vec<_>>().join(",")));
        }
        let mut records = Vec::new();
        for (i, row) in reader.records().enumerate() {
            let row = row.map_err(|e| e.to_string())?;
            records.push(Record::parse(&row).map_err(|e| format!("data row {}: {e}", i + 1))?);
        }
        Ok(Self { manifest, records })
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_csv_string()).map_err(|e| CliError::io(path, e))
    }

    /// Writes into an already opened file.
    pub fn write_to(&self, file: &mut fs::File, path: &Path) -> Result<(), CliError> {
        file.write_all(self.to_csv_string().as_bytes()).and_then(|_| file.flush()).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|message| CliError::Csv { path: path.to_path_buf(), message })
    }
}

/// Formats `x` with 10 significant digits, dropping trailing zeros, in
/// fixed notation for moderate magnitudes and scientific otherwise.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = mantissa.strip_prefix('-').map_or(("", mantissa), |m| ("-", m));
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    if !(-5..10).contains(&exp) {
        let m = trim_fraction(mantissa);
        return format!("{sign}{m}e{exp}");
    }
    let fixed = if exp >= 0 {
        let (int, frac) = digits.split_at(exp as usize + 1);
        format!("{int}.{frac}")
    } else {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    };
    format!("{sign}{}", trim_fraction(&fixed))
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
