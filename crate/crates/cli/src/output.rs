//! CSV and JSON writers for metrics records.

use std::io::Write;

use gbsim_core::MetricsRecord;
use serde::Serialize;

use crate::error::CliError;

pub const CSV_HEADER: [&str; 16] = [
    "scenario",
    "detector",
    "cov_mode",
    "L",
    "K",
    "n",
    "user",
    "snr_db",
    "eps",
    "trials",
    "mean_sinr",
    "mean_rate",
    "rate_ci95",
    "asym_sinr",
    "asym_rate",
    "degenerate_trials",
];

/// 17 significant digits, enough to round-trip any `f64`.
fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn optional(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

pub fn write_csv<W: Write>(out: W, records: &[MetricsRecord]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.scenario.clone(),
            r.detector.as_str().to_string(),
            r.cov_mode.clone(),
            r.cells.to_string(),
            r.users.to_string(),
            r.n.to_string(),
            r.user.to_string(),
            real(r.snr_db),
            real(r.eps),
            r.trials.to_string(),
            real(r.mean_sinr),
            real(r.mean_rate),
            real(r.rate_ci95),
            optional(r.asym_sinr),
            optional(r.asym_rate),
            r.degenerate_trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    #[serde(flatten)]
    record: &'a MetricsRecord,
    subspace: &'a str,
    sinr_eval: &'a str,
    seed: u64,
}

/// Run metadata repeated on every JSON record.
pub struct JsonContext<'a> {
    pub subspace: &'a str,
    pub sinr_eval: &'a str,
    pub seed: u64,
}

pub fn write_json<W: Write>(
    mut out: W,
    records: &[MetricsRecord],
    ctx: &JsonContext<'_>,
) -> std::io::Result<()> {
    let rows: Vec<JsonRecord<'_>> = records
        .iter()
        .map(|record| JsonRecord {
            record,
            subspace: ctx.subspace,
            sinr_eval: ctx.sinr_eval,
            seed: ctx.seed,
        })
        .collect();
    serde_json::to_writer_pretty(&mut out, &rows)?;
    writeln!(out)?;
    out.flush()
}

pub fn csv_failure(path: &str, err: csv::Error) -> CliError {
    match err.into_kind() {
        csv::ErrorKind::Io(e) => CliError::io(path, e),
        other => CliError::Runtime(format!("{other:?}")),
    }
}
