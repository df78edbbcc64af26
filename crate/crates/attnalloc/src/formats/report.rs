use super::{csv_reader, csv_writer, expect_header, field, line_of};
use crate::config::ConfigFile;
use crate::{Error, Result};
use attnalloc_core::experiment::{SweepPoint, SweepReport, UserReport};
use serde_json::{Map, Value};
use std::io::{Read, Write};

pub const REPORT_VERSION: &str = "attnalloc-report/1";
pub const REPORT_HEADER: [&str; 6] = [
    "user_id",
    "n_objects",
    "qoe_uniform",
    "qoe_aware",
    "qoe_oracle",
    "improvement_pct",
];
pub const SWEEP_HEADER: [&str; 2] = ["budget_factor_k", "mean_improvement_pct"];

pub fn write_report_csv<W: Write>(w: W, reports: &[UserReport]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(REPORT_HEADER)?;
    for r in reports {
        out.write_record([
            r.user.to_string(),
            r.n_objects.to_string(),
            r.qoe_uniform.to_string(),
            r.qoe_aware.to_string(),
            r.qoe_oracle.to_string(),
            r.improvement_pct.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_report_csv<R: Read>(r: R) -> Result<Vec<UserReport>> {
    let mut reader = csv_reader(r);
    expect_header(&mut reader, &REPORT_HEADER)?
        .iter()
        .map(|row| {
            check_width(row, REPORT_HEADER.len())?;
            Ok(UserReport {
                user: field(row, 0, "user_id")?,
                n_objects: field(row, 1, "n_objects")?,
                qoe_uniform: field(row, 2, "qoe_uniform")?,
                qoe_aware: field(row, 3, "qoe_aware")?,
                qoe_oracle: field(row, 4, "qoe_oracle")?,
                improvement_pct: field(row, 5, "improvement_pct")?,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(w: W, sweep: &SweepReport) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(SWEEP_HEADER)?;
    for p in &sweep.points {
        out.write_record([p.budget_factor_k.to_string(), p.mean_improvement_pct.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(r: R) -> Result<Vec<SweepPoint>> {
    let mut reader = csv_reader(r);
    expect_header(&mut reader, &SWEEP_HEADER)?
        .iter()
        .map(|row| {
            check_width(row, SWEEP_HEADER.len())?;
            Ok(SweepPoint {
                budget_factor_k: field(row, 0, "budget_factor_k")?,
                mean_improvement_pct: field(row, 1, "mean_improvement_pct")?,
            })
        })
        .collect()
}

fn check_width(row: &csv::StringRecord, width: usize) -> Result<()> {
    if row.len() != width {
        return Err(Error::parse(
            line_of(row),
            format!("expected {width} fields, found {}", row.len()),
        ));
    }
    Ok(())
}

/// Writes a JSON summary: version, seed and config echo, followed by the
/// fields of `body`.
pub fn write_summary<W: Write>(mut w: W, seed: u64, config: &ConfigFile, body: Value) -> Result<()> {
    let mut doc = Map::new();
    doc.insert("version".into(), REPORT_VERSION.into());
    doc.insert("seed".into(), seed.into());
    doc.insert("config".into(), serde_json::to_value(config)?);
    match body {
        Value::Object(fields) => doc.extend(fields),
        other => {
            doc.insert("result".into(), other);
        }
    }
    serde_json::to_writer_pretty(&mut w, &Value::Object(doc))?;
    w.write_all(b"\n")?;
    Ok(())
}
