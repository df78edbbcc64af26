//! On-disk formats. Every type has `write_*`/`read_*` over streams and
//! `save_*`/`load_*` over paths.

mod allocation;
mod model;
mod records;
mod report;
mod world;

pub use allocation::{
    read_weights, write_allocation, write_allocation_summary, AllocationSummary, WEIGHTS_HEADER,
};
pub use model::{load_model, read_model, save_model, write_model, MODEL_VERSION};
pub use records::{
    load_records, load_truth, read_records, read_truth, save_records, save_truth, write_records,
    write_truth, RECORDS_HEADER,
};
pub use report::{
    read_report_csv, read_sweep_csv, write_report_csv, write_summary, write_sweep_csv,
    REPORT_HEADER, REPORT_VERSION, SWEEP_HEADER,
};
pub use world::{load_world, read_world, save_world, write_world, WORLD_VERSION};

use crate::{Error, Result};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Creates `path`, hands a buffered writer to `body` and flushes it.
pub(crate) fn save_with<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn check_version(found: &str, expected: &str) -> Result<()> {
    if found != expected {
        return Err(Error::Format(format!(
            "unsupported version {found:?}, expected {expected:?}"
        )));
    }
    Ok(())
}

pub(crate) fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub(crate) fn csv_reader<R: std::io::Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(false).from_reader(r)
}

/// Checks the header row of a CSV stream. Returns the data rows.
pub(crate) fn expect_header<R: std::io::Read>(
    reader: &mut csv::Reader<R>,
    header: &[&str],
) -> Result<Vec<csv::StringRecord>> {
    let mut rows = reader.records();
    let first = match rows.next() {
        Some(row) => row?,
        None => return Err(Error::parse(1, "empty file, expected a header")),
    };
    if first.iter().ne(header.iter().copied()) {
        return Err(Error::parse(
            1,
            format!("expected header `{}`", header.join(",")),
        ));
    }
    rows.map(|r| r.map_err(Error::from)).collect()
}

pub(crate) fn line_of(row: &csv::StringRecord) -> u64 {
    row.position().map_or(0, |p| p.line())
}

pub(crate) fn field<T: std::str::FromStr>(row: &csv::StringRecord, idx: usize, name: &str) -> Result<T> {
    let raw = row.get(idx).ok_or_else(|| Error::parse(line_of(row), format!("missing {name}")))?;
    raw.parse()
        .map_err(|_| Error::parse(line_of(row), format!("invalid {name} {raw:?}")))
}
