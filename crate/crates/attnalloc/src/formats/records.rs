use super::{csv_reader, csv_writer, expect_header, field, line_of, open, save_with};
use crate::{Error, Result};
use attnalloc_core::attention::GroundTruthLevels;
use attnalloc_core::{Level, SparseAttentionRecords};
use std::io::{Read, Write};
use std::path::Path;

pub const RECORDS_HEADER: [&str; 3] = ["user_id", "object_id", "level"];

pub fn write_records<W: Write>(w: W, records: &SparseAttentionRecords) -> Result<()> {
    write_rows(w, records.iter())
}

pub fn write_truth<W: Write>(w: W, truth: &GroundTruthLevels) -> Result<()> {
    write_rows(w, truth.iter())
}

fn write_rows<W, I>(w: W, rows: I) -> Result<()>
where
    W: Write,
    I: Iterator<Item = (usize, usize, Level)>,
{
    let mut out = csv_writer(w);
    out.write_record(RECORDS_HEADER)?;
    for (u, o, level) in rows {
        out.write_record([u.to_string(), o.to_string(), level.get().to_string()])?;
    }
    out.flush()?;
    Ok(())
}

struct Row {
    line: u64,
    user: usize,
    object: usize,
    level: Level,
}

fn parse_rows<R: Read>(r: R) -> Result<Vec<Row>> {
    let mut reader = csv_reader(r);
    expect_header(&mut reader, &RECORDS_HEADER)?
        .iter()
        .map(|row| {
            let line = line_of(row);
            if row.len() != 3 {
                return Err(Error::parse(line, format!("expected 3 fields, found {}", row.len())));
            }
            let level: i64 = field(row, 2, "level")?;
            let level = Level::new(level)
                .map_err(|_| Error::parse(line, format!("level {level} outside 1..=5")))?;
            Ok(Row {
                line,
                user: field(row, 0, "user_id")?,
                object: field(row, 1, "object_id")?,
                level,
            })
        })
        .collect()
}

/// Reads sparse records. Without `dims` the matrix size is inferred as one
/// past the largest ids present. A dense ground-truth file is accepted too.
pub fn read_records<R: Read>(r: R, dims: Option<(usize, usize)>) -> Result<SparseAttentionRecords> {
    let rows = parse_rows(r)?;
    let (nu, no) = dims.unwrap_or_else(|| {
        let nu = rows.iter().map(|r| r.user + 1).max().unwrap_or(0);
        let no = rows.iter().map(|r| r.object + 1).max().unwrap_or(0);
        (nu, no)
    });
    let mut records = SparseAttentionRecords::new(nu, no);
    for row in rows {
        records
            .insert(row.user, row.object, row.level)
            .map_err(|e| Error::parse(row.line, e.to_string()))?;
    }
    Ok(records)
}

/// Reads a dense level matrix; every (user, object) pair must appear once.
pub fn read_truth<R: Read>(r: R) -> Result<GroundTruthLevels> {
    let records = read_records(r, None)?;
    let (nu, no) = (records.num_users(), records.num_objects());
    if records.len() != nu * no {
        return Err(Error::Format(format!(
            "ground truth is not dense: {} rows for {nu} users x {no} objects",
            records.len()
        )));
    }
    let levels = records.iter().map(|(_, _, l)| l).collect();
    Ok(GroundTruthLevels::new(nu, no, levels)?)
}

pub fn save_records(path: &Path, records: &SparseAttentionRecords) -> Result<()> {
    save_with(path, |w| write_records(w, records))
}

pub fn load_records(path: &Path, dims: Option<(usize, usize)>) -> Result<SparseAttentionRecords> {
    read_records(open(path)?, dims)
}

pub fn save_truth(path: &Path, truth: &GroundTruthLevels) -> Result<()> {
    save_with(path, |w| write_truth(w, truth))
}

pub fn load_truth(path: &Path) -> Result<GroundTruthLevels> {
    read_truth(open(path)?)
}
