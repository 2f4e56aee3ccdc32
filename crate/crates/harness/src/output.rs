//! CSV and JSON writers and output path resolution.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::OutputFormat;
use crate::error::HarnessError;
use crate::run::RunRecord;

/// Directory used when no explicit output path is given.
pub const OUTPUT_DIR_ENV: &str = "DGPMG_OUTPUT_DIR";

pub const CSV_HEADER: [&str; 24] = [
    "order",
    "nel",
    "aspect_ratio",
    "mu_star",
    "beta1",
    "beta2",
    "smoother",
    "weighting",
    "overlap_rule",
    "cycle",
    "solver",
    "decades",
    "max_cycles",
    "seed",
    "r0",
    "rn",
    "n",
    "rho",
    "r_bar",
    "n10",
    "omega_bar",
    "w10",
    "l2_error",
    "wall_ms",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn csv_row(r: &RunRecord) -> Vec<String> {
    let c = &r.config;
    let m = r.metrics.as_ref();
    vec![
        c.order.to_string(),
        c.nel.to_string(),
        c.aspect_ratio.to_string(),
        c.mu_star.to_string(),
        c.beta[0].to_string(),
        c.beta[1].to_string(),
        c.smoother.name().into(),
        c.weighting.name().into(),
        c.overlap_rule.name().into(),
        c.cycle.name().into(),
        c.solver.name().into(),
        c.decades.to_string(),
        c.effective_max_cycles().to_string(),
        c.seed.to_string(),
        opt(m.map(|m| m.r0)),
        opt(m.map(|m| m.rn)),
        opt(m.map(|m| m.n)),
        opt(m.map(|m| m.rho)),
        opt(m.map(|m| m.r_bar)),
        opt(m.map(|m| m.n10)),
        opt(m.map(|m| m.omega_bar)),
        opt(m.map(|m| m.w10)),
        opt(r.l2_error),
        format!("{:.3}", r.wall_ms),
    ]
}

fn csv_error(e: csv::Error) -> HarnessError {
    HarnessError::Io(e.to_string())
}

pub fn records_to_csv<'a>(records: impl IntoIterator<Item = &'a RunRecord>) -> Result<String, HarnessError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    for r in records {
        w.write_record(csv_row(r)).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Io(e.to_string()))
}

/// Serializes plain rows with a header taken from the field names.
pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<String, HarnessError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Io(e.to_string()))
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String, HarnessError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Explicit path, else `$DGPMG_OUTPUT_DIR/<stem>.<ext>`, else standard output.
pub fn resolve_output(explicit: Option<PathBuf>, stem: &str, format: OutputFormat) -> Option<PathBuf> {
    explicit.or_else(|| {
        std::env::var_os(OUTPUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| Path::new(&d).join(format!("{stem}.{}", format.extension())))
    })
}

pub fn emit(text: &str, path: Option<&Path>) -> Result<(), HarnessError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
