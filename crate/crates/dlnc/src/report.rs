//! CSV output.
//!
//! `trials.csv`: `trial,N,seed,wmax,algo,q,U,s1,s2,case`, one row per
//! trial and algorithm.
//!
//! `summary.csv`: `N,algo,q,mean_U,mean_wmax,pct_perfect,pct_within_one,trials,ci95_mean_U`,
//! one row per receiver count and algorithm. Percentages are in `[0, 100]`;
//! `ci95_mean_U` is the half-width of a normal 95% interval.
//!
//! Floats are written with 6 significant digits.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::experiment::{SummaryRow, TrialRecord};

pub const TRIALS_FILE: &str = "trials.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

pub const TRIALS_HEADER: [&str; 10] = ["trial", "N", "seed", "wmax", "algo", "q", "U", "s1", "s2", "case"];
pub const SUMMARY_HEADER: [&str; 9] =
    ["N", "algo", "q", "mean_U", "mean_wmax", "pct_perfect", "pct_within_one", "trials", "ci95_mean_U"];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ReportError + '_ {
    move |source| ReportError::Io { path: path.to_path_buf(), source }
}

/// Creates `dir` if needed and checks that files can be created in it.
pub fn prepare_output(dir: &Path) -> Result<(), ReportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let probe = dir.join(".dlnc-write-test");
    File::create(&probe).map_err(io_err(dir))?;
    fs::remove_file(&probe).map_err(io_err(&probe))
}

/// Formats like C's `%.6g`.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = format!("{x:.5e}");
    let (mantissa, e) = exp.split_once('e').expect("exponent form");
    let e: i32 = e.parse().expect("integer exponent");
    if !(-4..6).contains(&e) {
        let mantissa = trim_zeros(mantissa);
        let sign = if e < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", e.abs());
    }
    let decimals = (5 - e).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_trials<W: Write>(out: W, records: &[TrialRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIALS_HEADER)?;
    for r in records {
        w.write_record([
            r.trial.to_string(),
            r.receivers.to_string(),
            r.seed.to_string(),
            r.max_wants.to_string(),
            r.algo.to_string(),
            r.q.to_string(),
            r.transmissions.to_string(),
            r.s1.to_string(),
            r.s2.to_string(),
            r.case.name().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.receivers.to_string(),
            r.algo.to_string(),
            r.q.to_string(),
            format_float(r.mean_u),
            format_float(r.mean_wmax),
            format_float(r.pct_perfect),
            format_float(r.pct_within_one),
            r.trials.to_string(),
            format_float(r.ci95_u),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_atomic(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> csv::Result<()>,
) -> Result<PathBuf, ReportError> {
    let tmp = dir.join(format!(".{name}.tmp"));
    let result = File::create(&tmp).map_err(io_err(&tmp)).and_then(|file| {
        let mut out = BufWriter::new(file);
        body(&mut out).map_err(|source| ReportError::Csv { path: tmp.clone(), source })?;
        out.flush().map_err(io_err(&tmp))
    });
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    Ok(tmp)
}

/// Writes both files into `dir`. Each file is written to a temporary name
/// and renamed into place; on failure no temporary files are left behind.
pub fn emit_csv(records: &[TrialRecord], summary: &[SummaryRow], dir: &Path) -> Result<(), ReportError> {
    prepare_output(dir)?;
    let trials_tmp = write_atomic(dir, TRIALS_FILE, |w| write_trials(w, records))?;
    let summary_tmp = match write_atomic(dir, SUMMARY_FILE, |w| write_summary(w, summary)) {
        Ok(p) => p,
        Err(e) => {
            let _ = fs::remove_file(&trials_tmp);
            return Err(e);
        }
    };
    for (tmp, name) in [(&trials_tmp, TRIALS_FILE), (&summary_tmp, SUMMARY_FILE)] {
        let dest = dir.join(name);
        if let Err(source) = fs::rename(tmp, &dest) {
            let _ = fs::remove_file(&trials_tmp);
            let _ = fs::remove_file(&summary_tmp);
            return Err(ReportError::Io { path: dest, source });
        }
    }
    Ok(())
}
