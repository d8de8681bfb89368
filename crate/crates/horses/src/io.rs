//! CSV input: comma separated, `.` decimal point, UTF-8, with an optional
//! single header row detected by a non-numeric first record.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use horses_core::Matrix;

use crate::error::CliError;

/// Numeric table read from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn cols(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    /// Column names, falling back to `x1, x2, …`.
    pub fn names(&self) -> Vec<String> {
        match &self.header {
            Some(h) => h.clone(),
            None => (1..=self.cols()).map(|j| format!("x{j}")).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<Matrix, CliError> {
        Matrix::from_rows(&self.rows).map_err(CliError::from)
    }
}

fn parse_field(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok()
}

pub fn parse_table<R: Read>(reader: R, what: &str) -> Result<Table, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let parsed: Option<Vec<f64>> = rec.iter().map(parse_field).collect();
        match parsed {
            Some(row) => {
                if let Some(first) = rows.first() {
                    if first.len() != row.len() {
                        return Err(CliError::parse(format!(
                            "{what}: line {} has {} fields, expected {}",
                            i + 1,
                            row.len(),
                            first.len()
                        )));
                    }
                }
                rows.push(row);
            }
            None if i == 0 => {
                header = Some(rec.iter().map(|s| s.trim().to_string()).collect());
            }
            None => {
                return Err(CliError::parse(format!(
                    "{what}: non-numeric value on line {}",
                    i + 1
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::parse(format!("{what}: no numeric rows")));
    }
    if let Some(h) = &header {
        if h.len() != rows[0].len() {
            return Err(CliError::parse(format!(
                "{what}: header has {} names for {} columns",
                h.len(),
                rows[0].len()
            )));
        }
    }
    Ok(Table { header, rows })
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::parse(format!("cannot open {}: {e}", path.display())))?;
    parse_table(file, &path.display().to_string())
}

/// Single-column response file.
pub fn read_response(path: &Path) -> Result<Vec<f64>, CliError> {
    let t = read_table(path)?;
    if t.cols() != 1 {
        return Err(CliError::Dimension(format!(
            "response file {} has {} columns, expected 1",
            path.display(),
            t.cols()
        )));
    }
    Ok(t.rows.into_iter().map(|r| r[0]).collect())
}
