use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::learn::{AnchorSet, Example};

use super::{check_field, content_lines, read_text};

/// `label<TAB>term` lines.
pub fn parse_labeled_terms(text: &str, source: &str) -> Result<Vec<(String, String)>> {
    content_lines(text)
        .map(|(no, line)| {
            let (label, term) = line
                .split_once('\t')
                .filter(|(l, t)| !l.is_empty() && !t.trim().is_empty() && !t.contains('\t'))
                .ok_or_else(|| Error::parse(source, no, format!("expected 'label<TAB>term', got '{line}'")))?;
            Ok((label.to_string(), term.trim().to_string()))
        })
        .collect()
}

pub fn read_labeled_terms(path: &Path) -> Result<Vec<(String, String)>> {
    parse_labeled_terms(&read_text(path)?, &path.display().to_string())
}

/// `label<TAB>v1<TAB>…<TAB>vk` lines with a common width.
pub fn parse_labeled_vectors(text: &str, source: &str) -> Result<Vec<Example>> {
    let mut out: Vec<Example> = Vec::new();
    for (no, line) in content_lines(text) {
        let mut cells = line.split('\t');
        let label = cells.next().filter(|l| !l.is_empty()).ok_or_else(|| Error::parse(source, no, "empty label"))?;
        let values = cells
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(source, no, format!("'{c}' is not a finite number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(Error::parse(source, no, "no feature values"));
        }
        if let Some(first) = out.first() {
            if first.features.len() != values.len() {
                return Err(Error::parse(
                    source,
                    no,
                    format!("expected {} values, got {}", first.features.len(), values.len()),
                ));
            }
        }
        out.push(Example::new(label, values));
    }
    Ok(out)
}

pub fn read_labeled_vectors(path: &Path) -> Result<Vec<Example>> {
    parse_labeled_vectors(&read_text(path)?, &path.display().to_string())
}

/// Shortest round-trip reals, so reading back is bit-exact.
pub fn write_labeled_vectors(examples: &[Example]) -> Result<String> {
    let mut out = String::new();
    for e in examples {
        check_field("label", &e.label)?;
        out.push_str(&e.label);
        for v in &e.features {
            write!(out, "\t{v}").expect("string write");
        }
        out.push('\n');
    }
    Ok(out)
}

/// One anchor term per line; duplicates are rejected.
pub fn parse_anchors(text: &str, source: &str) -> Result<AnchorSet> {
    let mut terms: Vec<String> = Vec::new();
    for (no, line) in content_lines(text) {
        let t = line.trim().to_string();
        if terms.contains(&t) {
            return Err(Error::parse(source, no, format!("duplicate anchor '{t}'")));
        }
        terms.push(t);
    }
    AnchorSet::new(terms).map_err(|e| Error::parse(source, 0, e.to_string()))
}

pub fn read_anchors(path: &Path) -> Result<AnchorSet> {
    parse_anchors(&read_text(path)?, &path.display().to_string())
}
