use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;

use super::{check_field, read_text};

/// Largest disagreement accepted between mirrored cells.
pub const MATRIX_TOLERANCE: f64 = 5e-7;

const HEADER: &str = "#simdist-matrix v1";

/// `#simdist-matrix v1 n=<n>` followed by one `label<TAB>v1<TAB>…<TAB>vn` row per object.
pub fn write_matrix(m: &DistanceMatrix) -> Result<String> {
    let n = m.len();
    let mut out = format!("{HEADER} n={n}\n");
    for (i, label) in m.labels().iter().enumerate() {
        check_field("label", label)?;
        out.push_str(label);
        for v in m.row(i) {
            write!(out, "\t{v:.6}").expect("string write");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_matrix(text: &str, source: &str) -> Result<DistanceMatrix> {
    let err = |line, m: String| Error::parse(source, line, m);
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let n: usize = header
        .strip_prefix(HEADER)
        .and_then(|rest| rest.trim().strip_prefix("n="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| err(1, format!("expected '{HEADER} n=<n>', got '{header}'")))?;
    let mut labels = Vec::with_capacity(n);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut row_lines = Vec::with_capacity(n);
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        if labels.len() == n {
            return Err(err(no, format!("more than {n} rows")));
        }
        let mut cells = line.split('\t');
        let label = cells.next().unwrap_or_default();
        if label.is_empty() {
            return Err(err(no, "empty label".into()));
        }
        let row = cells
            .enumerate()
            .map(|(j, c)| {
                c.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(no, format!("column {}: '{c}' is not a number", j + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != n {
            return Err(err(no, format!("expected {n} values, got {}", row.len())));
        }
        labels.push(label.to_string());
        rows.push(row);
        row_lines.push(no);
    }
    if labels.len() != n {
        return Err(err(text.lines().count(), format!("expected {n} rows, got {}", labels.len())));
    }
    for i in 0..n {
        for j in i + 1..n {
            if (rows[i][j] - rows[j][i]).abs() > MATRIX_TOLERANCE {
                return Err(err(
                    row_lines[j],
                    format!(
                        "asymmetric cells ({}, {}) = {} and ({}, {}) = {}",
                        labels[i], labels[j], rows[i][j], labels[j], labels[i], rows[j][i]
                    ),
                ));
            }
        }
    }
    DistanceMatrix::from_rows(labels, &rows, MATRIX_TOLERANCE)
        .map_err(|e| err(1, e.to_string()))
}

pub fn read_matrix(path: &Path) -> Result<DistanceMatrix> {
    parse_matrix(&read_text(path)?, &path.display().to_string())
}
