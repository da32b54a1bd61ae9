//! CSV ingestion and the flat-file outputs.
//!
//! Reals are always written with 17 significant digits so that every value
//! reads back to the identical double.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::binning::Binning;
use crate::dataset::Dataset;
use crate::diagnostics::ResidualSet;
use crate::error::{Error, Result};
use crate::metrics::MetricTable;
use crate::model::LiftedModel;
use crate::scaling::{RawLayout, ScaledLayout};
use crate::tuning::{TuningRecord, TUNING_COLUMNS};

/// Shortest form that still carries 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub header: Vec<String>,
    pub values: Vec<f64>,
    pub rows: usize,
}

/// Parses a headed numeric CSV. Row and column numbers in errors are 1-based
/// and count data rows only.
pub fn read_matrix<R: Read>(reader: R, label: &str) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header: Vec<String> = match records.next() {
        Some(rec) => rec?.iter().map(str::to_string).collect(),
        None => {
            return Err(Error::MissingHeader {
                path: label.to_string(),
            })
        }
    };
    if header.iter().all(|h| h.parse::<f64>().is_ok()) {
        return Err(Error::MissingHeader {
            path: label.to_string(),
        });
    }
    let width = header.len();
    let mut values = Vec::new();
    let mut rows = 0;
    for rec in records {
        let rec = rec?;
        rows += 1;
        if rec.len() != width {
            return Err(Error::Ragged {
                path: label.to_string(),
                row: rows,
                expected: width,
                got: rec.len(),
            });
        }
        for (j, cell) in rec.iter().enumerate() {
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::Parse {
                        path: label.to_string(),
                        row: rows,
                        column: j + 1,
                        value: cell.to_string(),
                    })
                }
            }
        }
    }
    Ok(Matrix {
        header,
        values,
        rows,
    })
}

fn open(path: &Path) -> Result<File> {
    Ok(File::open(path)?)
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let m = read_matrix(open(path)?, &path.display().to_string())?;
    Dataset::new(m.values, m.rows, m.header)
}

/// Reads a two-column layout file; the layout id defaults to the file stem.
pub fn load_layout(path: &Path, layout_id: Option<&str>) -> Result<RawLayout> {
    let label = path.display().to_string();
    let m = read_matrix(open(path)?, &label)?;
    if m.header.len() != 2 {
        return Err(Error::Ragged {
            path: label,
            row: 0,
            expected: 2,
            got: m.header.len(),
        });
    }
    let id = layout_id.map(str::to_string).unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "layout".into())
    });
    let points = m.values.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
    RawLayout::new(id, points)
}

/// Reads rows to predict; columns must match the model's dimension.
pub fn load_rows(path: &Path) -> Result<(Vec<f64>, usize)> {
    let m = read_matrix(open(path)?, &path.display().to_string())?;
    Ok((m.values, m.header.len()))
}

/// Reads a one-column file of small nonnegative integer labels.
pub fn load_labels(path: &Path) -> Result<Vec<u8>> {
    let label = path.display().to_string();
    let m = read_matrix(open(path)?, &label)?;
    if m.header.len() != 1 {
        return Err(Error::Ragged {
            path: label,
            row: 0,
            expected: 1,
            got: m.header.len(),
        });
    }
    m.values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v.fract() == 0.0 && (0.0..=255.0).contains(&v) {
                Ok(v as u8)
            } else {
                Err(Error::Parse {
                    path: label.clone(),
                    row: i + 1,
                    column: 1,
                    value: v.to_string(),
                })
            }
        })
        .collect()
}

pub fn write_table<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let header: Vec<&str> = data.column_names().iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = data
        .rows()
        .map(|r| r.iter().copied().map(fmt_real).collect())
        .collect();
    write_table(create(path)?, &header, &rows)
}

pub fn write_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let rows: Vec<Vec<String>> = labels.iter().map(|l| vec![l.to_string()]).collect();
    write_table(create(path)?, &["label"], &rows)
}

pub fn write_points(path: &Path, points: &[[f64; 2]]) -> Result<()> {
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| vec![fmt_real(p[0]), fmt_real(p[1])])
        .collect();
    write_table(create(path)?, &["emb1", "emb2"], &rows)
}

pub fn write_layout(path: &Path, layout: &ScaledLayout) -> Result<()> {
    write_points(path, &layout.points)
}

/// `row_id,bin_id,e` with 0-based rows and 1-based bins.
pub fn write_residuals(path: &Path, binning: &Binning, residuals: &ResidualSet) -> Result<()> {
    let rows: Vec<Vec<String>> = residuals
        .e
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            vec![
                i.to_string(),
                (binning.assignment[i] + 1).to_string(),
                fmt_real(e),
            ]
        })
        .collect();
    write_table(create(path)?, &["row_id", "bin_id", "e"], &rows)
}

pub fn write_bins(path: &Path, model: &LiftedModel) -> Result<()> {
    let w = model.std_counts();
    let rows: Vec<Vec<String>> = (0..model.m())
        .map(|k| {
            vec![
                (model.bin_ids[k] + 1).to_string(),
                model.counts[k].to_string(),
                fmt_real(w[k]),
                fmt_real(model.centroids2d[k][0]),
                fmt_real(model.centroids2d[k][1]),
            ]
        })
        .collect();
    write_table(create(path)?, &["bin_id", "count", "w", "c1", "c2"], &rows)
}

pub fn write_edges(path: &Path, model: &LiftedModel) -> Result<()> {
    let rows: Vec<Vec<String>> = model
        .edges
        .edges
        .iter()
        .map(|e| {
            vec![
                (model.bin_ids[e[0]] + 1).to_string(),
                (model.bin_ids[e[1]] + 1).to_string(),
            ]
        })
        .collect();
    write_table(create(path)?, &["from", "to"], &rows)
}

pub fn tuning_rows(records: &[TuningRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .map(|r| {
            vec![
                r.layout_id.clone(),
                r.b1.to_string(),
                r.b2.to_string(),
                r.b.to_string(),
                r.m.to_string(),
                fmt_real(r.a1),
                fmt_real(r.mean_count),
                fmt_real(r.mean_std_count),
                fmt_real(r.nonempty_frac),
                fmt_real(r.cutoff),
                fmt_real(r.hbe),
            ]
        })
        .collect()
}

pub fn write_tuning(path: &Path, records: &[TuningRecord]) -> Result<()> {
    write_table(create(path)?, &TUNING_COLUMNS, &tuning_rows(records))
}

pub const METRIC_COLUMNS: [&str; 10] = [
    "layout_id",
    "a1",
    "hbe",
    "r_rta",
    "r_sc",
    "norm_hbe",
    "norm_r_rta",
    "norm_r_sc",
    "rta",
    "sc",
];

pub fn write_metric_table(path: &Path, table: &MetricTable) -> Result<()> {
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.layout_id.clone(),
                fmt_real(table.a1),
                fmt_real(r.hbe),
                fmt_real(r.r_rta),
                fmt_real(r.r_sc),
                fmt_real(r.norm_hbe),
                fmt_real(r.norm_r_rta),
                fmt_real(r.norm_r_sc),
                fmt_real(r.rta),
                fmt_real(r.sc),
            ]
        })
        .collect();
    write_table(create(path)?, &METRIC_COLUMNS, &rows)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}
