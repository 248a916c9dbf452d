use std::collections::HashSet;

use crate::error::{Error, Result};

/// Symmetric n×n distance matrix with one label per row.
///
/// Off-diagonal entries are stored once per unordered pair and mirrored, so
/// `get(i, j) == get(j, i)` holds bit-for-bit.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
}

pub(crate) fn check_unique_labels<S: AsRef<str>>(labels: &[S]) -> Result<()> {
    let mut seen: HashSet<&str> = HashSet::new();
    let mut dups: Vec<String> = Vec::new();
    for l in labels {
        if !seen.insert(l.as_ref()) {
            dups.push(l.as_ref().to_string());
        }
    }
    if dups.is_empty() {
        Ok(())
    } else {
        Err(Error::Argument(format!("duplicate labels: {}", dups.join(", "))))
    }
}

impl DistanceMatrix {
    /// Builds a matrix by evaluating `f(i, j)` for `i <= j` only.
    pub fn from_fn(labels: Vec<String>, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_unique_labels(&labels)?;
        let n = labels.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Ok(DistanceMatrix { labels, values })
    }

    /// Takes the upper triangle of `rows`; the lower triangle must agree within `tol`.
    pub fn from_rows(labels: Vec<String>, rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Argument(format!("matrix is not {n}x{n}")));
        }
        for i in 0..n {
            for j in i + 1..n {
                if (rows[i][j] - rows[j][i]).abs() > tol {
                    return Err(Error::Argument(format!(
                        "asymmetric entries ({}, {}) = {} vs ({}, {}) = {}",
                        labels[i], labels[j], rows[i][j], labels[j], labels[i], rows[j][i]
                    )));
                }
            }
        }
        Self::from_fn(labels, |i, j| rows[i][j])
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.labels.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.labels.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn by_label(&self, a: &str, b: &str) -> Result<f64> {
        let lookup = |l: &str| {
            self.index_of(l)
                .ok_or_else(|| Error::Argument(format!("label '{l}' not in matrix")))
        };
        Ok(self.get(lookup(a)?, lookup(b)?))
    }

    /// Every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> DistanceMatrix {
        DistanceMatrix {
            labels: self.labels.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Entries clamped into `[lo, hi]`.
    pub fn clamped(&self, lo: f64, hi: f64) -> DistanceMatrix {
        DistanceMatrix {
            labels: self.labels.clone(),
            values: self.values.iter().map(|v| v.clamp(lo, hi)).collect(),
        }
    }

    /// Unordered off-diagonal pairs `(i, j)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("o{i}")).collect()
    }

    #[test]
    fn from_fn_mirrors() {
        let m = DistanceMatrix::from_fn(labels(3), |i, j| (i * 10 + j) as f64).unwrap();
        assert_eq!(m.get(0, 2), 2.0);
        assert_eq!(m.get(2, 0), 2.0);
        assert_eq!(m.get(1, 1), 11.0);
        assert_eq!(m.pairs().count(), 3);
    }

    #[test]
    fn duplicate_labels_rejected() {
        let r = DistanceMatrix::from_fn(vec!["a".into(), "a".into()], |_, _| 0.0);
        assert!(matches!(r, Err(Error::Argument(_))));
    }

    #[test]
    fn asymmetric_rows_rejected() {
        let rows = vec![vec![0.0, 0.4], vec![0.5, 0.0]];
        assert!(DistanceMatrix::from_rows(labels(2), &rows, 5e-7).is_err());
        let rows = vec![vec![0.0, 0.4], vec![0.4000001, 0.0]];
        let m = DistanceMatrix::from_rows(labels(2), &rows, 5e-7).unwrap();
        assert_eq!(m.get(1, 0), 0.4);
    }
}
