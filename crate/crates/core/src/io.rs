//! CSV formats for count matrices, real matrices and signature catalogs.
//!
//! Every matrix file has a header row (first cell is the row-label column name) and one
//! labelled row per matrix row. Reals are written with 17 significant digits so that a
//! write/read cycle is exact.

use crate::error::{Error, Result};
use crate::model::{CountMatrix, SignatureMatrix};
use ndarray::{Array2, ArrayView2};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

/// Largest allowed deviation of a catalog column sum from 1 before renormalisation.
pub const CATALOG_TOL: f64 = 1e-3;

const SBS_FIXTURE: &str = include_str!("../fixtures/sbs_catalog.csv");
const INDEL_FIXTURE: &str = include_str!("../fixtures/indel_catalog.csv");

/// Real matrix with row and column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    pub corner: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Array2<f64>,
}

/// Column-stochastic signature catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub channels: Vec<String>,
    pub labels: Vec<String>,
    pub signatures: SignatureMatrix,
}

impl Catalog {
    /// Sub-catalog with the named signatures, in the given order.
    pub fn subset(&self, names: &[&str]) -> Result<Catalog> {
        let idx = names
            .iter()
            .map(|n| {
                self.labels
                    .iter()
                    .position(|l| l == n)
                    .ok_or_else(|| Error::domain(format!("signature {n} not in catalog")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Catalog {
            channels: self.channels.clone(),
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
            signatures: self.signatures.select(&idx),
        })
    }

    /// Reorders the catalog rows to follow `channels`, which must be a permutation of the
    /// catalog's channel labels.
    pub fn align_channels(&self, channels: &[String]) -> Result<Catalog> {
        if channels == self.channels.as_slice() {
            return Ok(self.clone());
        }
        if channels.len() != self.channels.len() {
            return Err(Error::Dimension(format!(
                "catalog has {} channels, data {}",
                self.channels.len(),
                channels.len()
            )));
        }
        let rows = channels
            .iter()
            .map(|c| {
                self.channels
                    .iter()
                    .position(|x| x == c)
                    .ok_or_else(|| Error::format(None, format!("channel {c} missing from catalog")))
            })
            .collect::<Result<Vec<_>>>()?;
        let m = self.signatures.as_array().select(ndarray::Axis(0), &rows);
        Ok(Catalog {
            channels: channels.to_vec(),
            labels: self.labels.clone(),
            signatures: SignatureMatrix::new(m)?,
        })
    }
}

/// Text form used for every real written to disk.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

struct Table {
    header: Vec<String>,
    labels: Vec<String>,
    cells: Vec<(usize, Vec<String>)>,
}

fn read_table<R: Read>(reader: R, allow_empty: bool) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(csv_err)?,
        None => return Err(Error::format(None, "empty file")),
    };
    let header: Vec<String> = header.iter().map(str::to_string).collect();
    if header.is_empty() || (header.len() < 2 && !allow_empty) {
        return Err(Error::format(Some(1), "header needs a label column and at least one data column"));
    }
    let mut labels = Vec::new();
    let mut cells = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != header.len() {
            return Err(Error::format(
                Some(line),
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        labels.push(rec[0].to_string());
        cells.push((line, rec.iter().skip(1).map(str::to_string).collect()));
    }
    if cells.is_empty() && !allow_empty {
        return Err(Error::format(None, "no data rows"));
    }
    Ok(Table { header, labels, cells })
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::format(line, format!("{kind:?}")),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Reads a channels × samples count matrix.
pub fn read_counts<R: Read>(reader: R) -> Result<CountMatrix> {
    let t = read_table(reader, false)?;
    let nj = t.header.len() - 1;
    let mut m = Array2::zeros((t.cells.len(), nj));
    for (i, (line, row)) in t.cells.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[[i, j]] = v.parse::<u32>().map_err(|_| {
                Error::format(
                    Some(*line),
                    format!("column {} ({}): '{v}' is not a nonnegative integer count", j + 2, t.header[j + 1]),
                )
            })?;
        }
    }
    CountMatrix::new(m, t.labels, t.header[1..].to_vec())
}

pub fn read_counts_path(path: impl AsRef<Path>) -> Result<CountMatrix> {
    read_counts(open(path.as_ref())?)
}

/// Reads a labelled real matrix. Zero rows or zero columns are allowed.
pub fn read_matrix<R: Read>(reader: R) -> Result<LabeledMatrix> {
    let t = read_table(reader, true)?;
    let nc = t.header.len() - 1;
    let mut m = Array2::zeros((t.cells.len(), nc));
    for (i, (line, row)) in t.cells.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let x: f64 = v
                .parse()
                .map_err(|_| Error::format(Some(*line), format!("column {}: '{v}' is not a number", j + 2)))?;
            if !x.is_finite() {
                return Err(Error::format(Some(*line), format!("column {}: non-finite value", j + 2)));
            }
            m[[i, j]] = x;
        }
    }
    Ok(LabeledMatrix {
        corner: t.header[0].clone(),
        row_labels: t.labels,
        col_labels: t.header[1..].to_vec(),
        values: m,
    })
}

pub fn read_matrix_path(path: impl AsRef<Path>) -> Result<LabeledMatrix> {
    read_matrix(open(path.as_ref())?)
}

/// Reads a catalog of signatures (channels × signatures). Columns must sum to 1 within
/// [`CATALOG_TOL`] and are renormalised exactly.
pub fn read_catalog<R: Read>(reader: R) -> Result<Catalog> {
    let m = read_matrix(reader)?;
    if m.values.is_empty() {
        return Err(Error::format(None, "catalog has no signatures or no channels"));
    }
    for (k, col) in m.values.columns().into_iter().enumerate() {
        let s: f64 = col.sum();
        if col.iter().any(|&v| v < 0.0) || (s - 1.0).abs() > CATALOG_TOL {
            return Err(Error::format(
                None,
                format!("catalog column {} sums to {s}, not 1", m.col_labels[k]),
            ));
        }
    }
    Ok(Catalog {
        channels: m.row_labels,
        labels: m.col_labels,
        signatures: SignatureMatrix::renormalised(m.values)?,
    })
}

pub fn read_catalog_path(path: impl AsRef<Path>) -> Result<Catalog> {
    read_catalog(open(path.as_ref())?)
}

/// Bundled 96-channel synthetic stand-ins for catalog SBS signatures.
pub fn sbs_fixture() -> Catalog {
    read_catalog(SBS_FIXTURE.as_bytes()).expect("bundled fixture parses")
}

/// Bundled 83-channel synthetic stand-ins for catalog indel signatures.
pub fn indel_fixture() -> Catalog {
    read_catalog(INDEL_FIXTURE.as_bytes()).expect("bundled fixture parses")
}

/// Writes a header and rows of preformatted fields.
pub fn write_table<W: Write>(writer: W, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_counts<W: Write>(writer: W, x: &CountMatrix) -> Result<()> {
    let mut header = vec!["channel".to_string()];
    header.extend(x.samples().iter().cloned());
    let rows = x.counts().outer_iter().zip(x.channels()).map(|(row, ch)| {
        std::iter::once(ch.clone())
            .chain(row.iter().map(|v| v.to_string()))
            .collect()
    });
    write_table(writer, &header, rows)
}

pub fn write_matrix<W: Write>(
    writer: W,
    corner: &str,
    row_labels: &[String],
    col_labels: &[String],
    values: ArrayView2<'_, f64>,
) -> Result<()> {
    if values.dim() != (row_labels.len(), col_labels.len()) {
        return Err(Error::Dimension(format!(
            "matrix {:?} with {} row and {} column labels",
            values.dim(),
            row_labels.len(),
            col_labels.len()
        )));
    }
    let mut header = vec![corner.to_string()];
    header.extend(col_labels.iter().cloned());
    let rows = values.outer_iter().zip(row_labels).map(|(row, l)| {
        std::iter::once(l.clone())
            .chain(row.iter().map(|&v| format_real(v)))
            .collect()
    });
    write_table(writer, &header, rows)
}

/// Writes a trace table: one row per iteration, first column the iteration index.
pub fn write_trace<W: Write>(writer: W, names: &[String], columns: &[Vec<f64>]) -> Result<()> {
    let n = columns.first().map_or(0, Vec::len);
    if names.len() != columns.len() || columns.iter().any(|c| c.len() != n) {
        return Err(Error::Dimension("trace columns of unequal length".into()));
    }
    let mut header = vec!["iteration".to_string()];
    header.extend(names.iter().cloned());
    let rows = (0..n).map(|t| {
        std::iter::once(t.to_string())
            .chain(columns.iter().map(|c| format_real(c[t])))
            .collect()
    });
    write_table(writer, &header, rows)
}

/// Reads a trace table written by [`write_trace`]; returns column names and columns.
pub fn read_trace<R: Read>(reader: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let m = read_matrix(reader)?;
    let cols = m.values.columns().into_iter().map(|c| c.to_vec()).collect();
    Ok((m.col_labels, cols))
}

/// Creates a buffered file writer.
pub fn create(path: impl AsRef<Path>) -> Result<BufWriter<File>> {
    let p = path.as_ref();
    let f = File::create(p).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display()))))?;
    Ok(BufWriter::new(f))
}

/// Default labels `prefix1..prefixN`.
pub fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}
