//! Command-line front end of the sidelink simulator: flag and config-file
//! parsing, figure presets, and CSV results with a reproducibility
//! manifest.

mod error;
pub mod output;
pub mod settings;

use std::ffi::OsString;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use sidelink_core::engine::{run_intercept_sweep, run_sweep};

pub use error::CliError;
use output::{CsvDocument, Record, TIMESTAMP_PREFIX};
use settings::{Args, Job, RunPlan, SEED_ENV};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Runs every curve of `job`, in order.
pub fn simulate(job: &Job) -> Result<Vec<Record>, CliError> {
    let mut records = Vec::new();
    match job {
        Job::Ber(configs) => {
            for c in configs {
                let t = Instant::now();
                let curve = run_sweep(c).map_err(CliError::Runtime)?;
                eprintln!("{} case {} {} N={}: {} points in {:.1?}", c.scheme, c.case.case_id(), c.modulation, c.n_devices, curve.len(), t.elapsed());
                records.extend(curve.iter().map(|e| Record::ber(c, e)));
            }
        }
        Job::Intercept { configs, lambda_grid_db, trials } => {
            for c in configs {
                let curve = run_intercept_sweep(c, lambda_grid_db, *trials).map_err(CliError::Runtime)?;
                records.extend(curve.iter().map(|e| Record::intercept(c, e)));
            }
        }
    }
    Ok(records)
}

/// Manifest lines: tool version, timestamp, then the effective settings in
/// config-file syntax.
pub fn manifest(plan: &RunPlan, timestamp: &str) -> Vec<String> {
    let mut lines = vec![format!("sidelink-sim {VERSION}"), format!("{}{timestamp}", &TIMESTAMP_PREFIX[2..])];
    lines.extend(plan.effective.iter().map(|(k, v)| format!("{k} = {v}")));
    lines
}

/// Executes a resolved plan and returns the results document, which is
/// also written to [`RunPlan::csv_path`]. The output file is created before
/// any simulation runs.
pub fn execute(plan: &RunPlan) -> Result<CsvDocument, CliError> {
    fs::create_dir_all(&plan.out_dir).map_err(|e| CliError::io(&plan.out_dir, e))?;
    let path = plan.csv_path();
    let mut file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let doc = CsvDocument { manifest: manifest(plan, &timestamp), records: simulate(&plan.job)? };
    doc.write_to(&mut file, &path)?;
    Ok(doc)
}

/// Parses `args` (including the program name), runs, and returns the
/// process exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = args
        .settings()
        .and_then(|map| settings::resolve(&map, std::env::var(SEED_ENV).ok()))
        .and_then(|plan| execute(&plan).map(|_| plan.csv_path()));
    match result {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sidelink-sim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
