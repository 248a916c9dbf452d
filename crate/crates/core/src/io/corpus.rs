use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ngd::CorpusIndex;

use super::read_text;

/// How documents are laid out on disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusLayout {
    /// A directory of plain-text files, one document per file, in file-name order.
    Directory,
    /// A single file with one document per line.
    Lines,
}

impl CorpusLayout {
    pub fn detect(path: &Path) -> Self {
        if path.is_dir() {
            CorpusLayout::Directory
        } else {
            CorpusLayout::Lines
        }
    }
}

/// Raw document texts.
pub fn read_corpus(path: &Path, layout: CorpusLayout) -> Result<Vec<String>> {
    match layout {
        CorpusLayout::Lines => Ok(read_text(path)?.lines().map(str::to_string).collect()),
        CorpusLayout::Directory => {
            let mut files = Vec::new();
            for entry in std::fs::read_dir(path).map_err(|e| Error::io(path, e))? {
                let p = entry.map_err(|e| Error::io(path, e))?.path();
                if p.is_file() {
                    files.push(p);
                }
            }
            files.sort();
            files
                .iter()
                .map(|f| {
                    let bytes = std::fs::read(f).map_err(|e| Error::io(f, e))?;
                    Ok(String::from_utf8_lossy(&bytes).into_owned())
                })
                .collect()
        }
    }
}

const HEADER: &str = "#simdist-index v1";

/// `#simdist-index v1 docs=<M>` then `term<TAB>id,id,…` per term in sorted order.
pub fn write_index(index: &CorpusIndex) -> String {
    let mut out = format!("{HEADER} docs={}\n", index.document_count());
    for (term, ids) in index.postings() {
        out.push_str(term);
        out.push('\t');
        for (k, id) in ids.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "{id}").expect("string write");
        }
        out.push('\n');
    }
    out
}

pub fn read_index(path: &Path) -> Result<CorpusIndex> {
    let source = path.display().to_string();
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let header = lines.next().map_or("", |(_, l)| l);
    let docs: usize = header
        .strip_prefix(HEADER)
        .and_then(|r| r.trim().strip_prefix("docs="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::parse(&source, 1, format!("expected '{HEADER} docs=<M>'")))?;
    let mut postings = BTreeMap::new();
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let (term, ids) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(&source, no, "expected 'term<TAB>ids'"))?;
        let ids = ids
            .split(',')
            .map(|s| s.parse::<u32>().map_err(|_| Error::parse(&source, no, format!("bad document id '{s}'"))))
            .collect::<Result<Vec<u32>>>()?;
        if postings.insert(term.to_string(), ids).is_some() {
            return Err(Error::parse(&source, no, format!("term '{term}' listed twice")));
        }
    }
    CorpusIndex::from_postings(docs, postings).map_err(|e| Error::parse(&source, 0, e.to_string()))
}
