//! Plain-text file formats: distance matrices, Newick and DOT trees, search
//! traces, labeled term sets, anchor lists, SVM models, corpus indexes and
//! corpus directories. All UTF-8 with LF line endings.

mod corpus;
mod matrix;
mod model;
mod sets;
mod tree;

pub use corpus::{read_corpus, read_index, write_index, CorpusLayout};
pub use matrix::{parse_matrix, read_matrix, write_matrix, MATRIX_TOLERANCE};
pub use model::{parse_model, read_model, write_model};
pub use sets::{
    parse_anchors, parse_labeled_terms, parse_labeled_vectors, read_anchors, read_labeled_terms,
    read_labeled_vectors, write_labeled_vectors,
};
pub use tree::{parse_newick, parse_trace, write_dot, write_newick, write_trace, ParsedNewick};

use std::path::Path;

use crate::error::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Labels end up in tab-separated columns, so they may not contain tabs or line breaks.
pub(crate) fn check_field(what: &str, s: &str) -> Result<()> {
    if s.is_empty() || s.contains(['\t', '\n', '\r']) {
        return Err(Error::Argument(format!("{what} {s:?} must be non-empty without tabs or newlines")));
    }
    Ok(())
}

/// Content lines with their 1-based numbers, skipping blanks and `#` comments.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}
