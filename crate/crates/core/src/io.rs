//! File formats: JSON reports and potentials, CSV dumps.
//!
//! | file            | header                  |
//! |-----------------|-------------------------|
//! | eigenvalues     | `trial,index,re,im`     |
//! | singulars       | `trial,index,value`     |
//! | distances       | `trial,k,distance`      |
//! | measure         | `index,re,im,weight`    |
//! | sample dump     | `trial,i,j,value`       |
//!
//! Every writer is deterministic: identical inputs give identical bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::Result;
use crate::experiments::ExperimentReport;
use crate::matrix::Matrix;
use crate::measures::{EmpiricalMeasure, PotentialComparison};

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<W> {
    w.flush()?;
    w.into_inner()
        .map_err(|e| crate::LabError::Io(std::io::Error::other(e.to_string())))
}

/// Writes into memory; `f` gets a CSV writer with the header already written.
fn csv_bytes<const K: usize>(
    header: [&str; K],
    f: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
) -> Result<Vec<u8>> {
    let mut w = csv_writer(Vec::new());
    w.write_record(header)?;
    f(&mut w)?;
    finish(w)
}

pub fn eigenvalues_csv(rows: &[(usize, usize, Complex64)]) -> Result<Vec<u8>> {
    csv_bytes(["trial", "index", "re", "im"], |w| {
        for (t, k, z) in rows {
            w.write_record([t.to_string(), k.to_string(), z.re.to_string(), z.im.to_string()])?;
        }
        Ok(())
    })
}

pub fn singulars_csv(rows: &[(usize, usize, f64)]) -> Result<Vec<u8>> {
    csv_bytes(["trial", "index", "value"], |w| {
        for (t, k, v) in rows {
            w.write_record([t.to_string(), k.to_string(), v.to_string()])?;
        }
        Ok(())
    })
}

pub fn distances_csv(rows: &[(usize, usize, f64)]) -> Result<Vec<u8>> {
    csv_bytes(["trial", "k", "distance"], |w| {
        for (t, k, d) in rows {
            w.write_record([t.to_string(), k.to_string(), d.to_string()])?;
        }
        Ok(())
    })
}

pub fn measure_csv(measure: &EmpiricalMeasure) -> Result<Vec<u8>> {
    csv_bytes(["index", "re", "im", "weight"], |w| {
        for (i, a) in measure.atoms().iter().enumerate() {
            w.write_record([
                i.to_string(),
                a.position.re.to_string(),
                a.position.im.to_string(),
                a.weight.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// Sample dump of several matrices; `trial` is the position in `matrices`.
pub fn samples_csv(matrices: &[Matrix]) -> Result<Vec<u8>> {
    csv_bytes(["trial", "i", "j", "value"], |w| {
        for (t, m) in matrices.iter().enumerate() {
            for i in 0..m.rows() {
                for (j, v) in m.row(i).iter().enumerate() {
                    w.write_record([t.to_string(), i.to_string(), j.to_string(), v.to_string()])?;
                }
            }
        }
        Ok(())
    })
}

pub fn potentials_json(records: &[PotentialComparison]) -> Result<String> {
    Ok(serde_json::to_string_pretty(records)? + "\n")
}

pub fn report_json(report: &ExperimentReport) -> Result<String> {
    Ok(report.to_json()? + "\n")
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Reads back an eigenvalue CSV.
pub fn read_eigenvalues_csv(bytes: &[u8]) -> Result<Vec<(usize, usize, Complex64)>> {
    let mut r = csv::Reader::from_reader(bytes);
    let mut out = Vec::new();
    for rec in r.deserialize() {
        let (t, k, re, im): (usize, usize, f64, f64) = rec?;
        out.push((t, k, Complex64::new(re, im)));
    }
    Ok(out)
}
