use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::learn::SvmModel;

use super::{check_field, read_text};

const HEADER: &str = "#simdist-svm v1";

/// Versioned flat file; reals in shortest round-trip form so reading back is bit-exact.
///
/// ```text
/// #simdist-svm v1
/// kernel rbf
/// gamma <γ>
/// cost <C>
/// labels <positive><TAB><negative>
/// bias <b>
/// support <count> <dimension>
/// <coefficient><TAB><x1><TAB>…<TAB><xd>
/// ```
pub fn write_model(m: &SvmModel) -> Result<String> {
    for l in &m.labels {
        check_field("label", l)?;
    }
    let dim = m.dimension().unwrap_or(0);
    let mut out = format!("{HEADER}\nkernel rbf\n");
    writeln!(out, "gamma {}", m.gamma).expect("string write");
    writeln!(out, "cost {}", m.cost).expect("string write");
    writeln!(out, "labels {}\t{}", m.labels[0], m.labels[1]).expect("string write");
    writeln!(out, "bias {}", m.bias).expect("string write");
    writeln!(out, "support {} {dim}", m.support_vectors.len()).expect("string write");
    for (sv, c) in m.support_vectors.iter().zip(&m.coefficients) {
        write!(out, "{c}").expect("string write");
        for v in sv {
            write!(out, "\t{v}").expect("string write");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_model(text: &str, source: &str) -> Result<SvmModel> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |want: &str| -> Result<(usize, String)> {
        let (no, line) = lines
            .next()
            .ok_or_else(|| Error::parse(source, 0, format!("missing '{want}' line")))?;
        let rest = line
            .strip_prefix(want)
            .ok_or_else(|| Error::parse(source, no, format!("expected '{want}', got '{line}'")))?;
        Ok((no, rest.trim_start_matches(' ').to_string()))
    };
    let real = |no: usize, s: &str| -> Result<f64> {
        s.parse::<f64>().map_err(|_| Error::parse(source, no, format!("'{s}' is not a number")))
    };
    next(HEADER)?;
    let (no, kernel) = next("kernel")?;
    if kernel != "rbf" {
        return Err(Error::parse(source, no, format!("unsupported kernel '{kernel}'")));
    }
    let (no, g) = next("gamma")?;
    let gamma = real(no, &g)?;
    let (no, c) = next("cost")?;
    let cost = real(no, &c)?;
    let (no, l) = next("labels")?;
    let (pos, neg) = l
        .split_once('\t')
        .ok_or_else(|| Error::parse(source, no, "expected two tab-separated labels"))?;
    let (no, b) = next("bias")?;
    let bias = real(no, &b)?;
    let (no, s) = next("support")?;
    let (count, dim) = s
        .split_once(' ')
        .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
        .ok_or_else(|| Error::parse(source, no, "expected 'support <count> <dimension>'"))?;
    let mut support_vectors = Vec::with_capacity(count);
    let mut coefficients = Vec::with_capacity(count);
    for _ in 0..count {
        let (no, line) = next("")?;
        let cells = line
            .split('\t')
            .map(|c| real(no, c))
            .collect::<Result<Vec<f64>>>()?;
        if cells.len() != dim + 1 {
            return Err(Error::parse(source, no, format!("expected {} columns, got {}", dim + 1, cells.len())));
        }
        coefficients.push(cells[0]);
        support_vectors.push(cells[1..].to_vec());
    }
    Ok(SvmModel {
        gamma,
        cost,
        labels: [pos.to_string(), neg.to_string()],
        bias,
        support_vectors,
        coefficients,
    })
}

pub fn read_model(path: &Path) -> Result<SvmModel> {
    parse_model(&read_text(path)?, &path.display().to_string())
}
