use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sweep::SweepResult;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "truth,snr_db,k,method,optimizer,init,mse_mean,ci_lo,ci_hi,bias_sq,variance,converged_frac,wall_s";

/// One CSV row. `mse_mean` is the per-frame mean of the squared 2D error
/// vector, in px².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub truth: String,
    pub snr_db: f64,
    pub k: usize,
    pub method: String,
    pub optimizer: String,
    pub init: String,
    pub mse_mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub bias_sq: f64,
    pub variance: f64,
    pub converged_frac: f64,
    pub wall_s: f64,
}

pub fn rows(result: &SweepResult) -> Vec<CsvRow> {
    result
        .cells
        .iter()
        .map(|c| {
            let (method, optimizer, init) = c.method.columns();
            CsvRow {
                truth: c.truth.clone(),
                snr_db: c.snr_db,
                k: c.k,
                method: method.into(),
                optimizer: optimizer.into(),
                init: init.into(),
                mse_mean: c.stats.mse_mean,
                ci_lo: c.stats.ci_lo,
                ci_hi: c.stats.ci_hi,
                bias_sq: c.stats.bias_sq,
                variance: c.stats.variance,
                converged_frac: c.stats.converged_frac,
                wall_s: c.wall_s,
            }
        })
        .collect()
}

/// Writes the header and one row per cell in the result's (sorted) order.
pub fn write_csv_to<W: Write>(writer: W, result: &SweepResult) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    let csv_err = |e: csv::Error| Error::Numerical(format!("CSV output: {e}"));
    w.write_record(CSV_HEADER.split(',')).map_err(csv_err)?;
    for row in rows(result) {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Numerical(format!("CSV output: {e}")))
}

pub fn write_csv(path: &Path, result: &SweepResult) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(std::io::BufWriter::new(file), result).map_err(|e| match e {
        Error::Numerical(m) => Error::io(path, m),
        other => other,
    })
}

pub fn read_csv_from<R: Read>(reader: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::invalid(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::invalid(format!("unexpected CSV header '{}'", header.join(","))));
    }
    r.deserialize().map(|row| row.map_err(|e| Error::invalid(e.to_string()))).collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_from(file).map_err(|e| Error::io(path, e))
}
