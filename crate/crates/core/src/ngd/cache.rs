use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};

/// Orders a term pair lexicographically so `(x, y)` and `(y, x)` share a key.
pub fn canonical_pair<'a>(x: &'a str, y: &'a str) -> (&'a str, &'a str) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheEntry {
    pub count: u64,
    pub provider_id: String,
    /// Unix seconds when the count was fetched.
    pub timestamp: u64,
}

type Key = (String, String, String);

/// Append-only persistent store of fetched counts.
///
/// File format: one record per line, `x<TAB>y<TAB>count<TAB>provider-id<TAB>unix-timestamp`,
/// with `x == y` for singletons and `x ≤ y`. Later records override earlier ones.
#[derive(Debug)]
pub struct CountCache {
    path: Option<PathBuf>,
    entries: RwLock<HashMap<Key, CacheEntry>>,
    file: Mutex<Option<File>>,
}

fn check_field(s: &str) -> Result<()> {
    if s.is_empty() || s.contains(['\t', '\n', '\r']) {
        return Err(Error::Argument(format!(
            "cache fields must be non-empty without tabs or newlines: {s:?}"
        )));
    }
    Ok(())
}

impl CountCache {
    pub fn in_memory() -> Self {
        CountCache { path: None, entries: RwLock::default(), file: Mutex::new(None) }
    }

    /// Loads `path` if it exists and appends new records to it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        if path.exists() {
            let f = File::open(&path).map_err(|e| Error::io(&path, e))?;
            let shown = path.display().to_string();
            for (i, line) in BufReader::new(f).lines().enumerate() {
                let line = line.map_err(|e| Error::io(&path, e))?;
                if line.is_empty() {
                    continue;
                }
                let cols: Vec<&str> = line.split('\t').collect();
                let [x, y, count, id, ts] = cols[..] else {
                    return Err(Error::parse(&shown, i + 1, format!("expected 5 fields, got {}", cols.len())));
                };
                if x > y {
                    return Err(Error::parse(&shown, i + 1, "pair is not in canonical order"));
                }
                let count = count
                    .parse()
                    .map_err(|_| Error::parse(&shown, i + 1, format!("bad count '{count}'")))?;
                let timestamp = ts
                    .parse()
                    .map_err(|_| Error::parse(&shown, i + 1, format!("bad timestamp '{ts}'")))?;
                entries.insert(
                    (x.to_string(), y.to_string(), id.to_string()),
                    CacheEntry { count, provider_id: id.to_string(), timestamp },
                );
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(CountCache { path: Some(path), entries: RwLock::new(entries), file: Mutex::new(Some(file)) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, x: &str, y: &str, provider_id: &str) -> Option<CacheEntry> {
        let (a, b) = canonical_pair(x, y);
        self.entries
            .read()
            .expect("cache lock")
            .get(&(a.to_string(), b.to_string(), provider_id.to_string()))
            .cloned()
    }

    /// Records a count, stamping it with the current time.
    pub fn insert(&self, x: &str, y: &str, count: u64, provider_id: &str) -> Result<CacheEntry> {
        for s in [x, y, provider_id] {
            check_field(s)?;
        }
        let (a, b) = canonical_pair(x, y);
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let entry = CacheEntry { count, provider_id: provider_id.to_string(), timestamp };
        let mut file = self.file.lock().expect("cache file lock");
        if let Some(f) = file.as_mut() {
            let path = self.path.as_deref().unwrap_or(Path::new(""));
            writeln!(f, "{a}\t{b}\t{count}\t{provider_id}\t{timestamp}")
                .and_then(|_| f.flush())
                .map_err(|e| Error::io(path, e))?;
        }
        self.entries
            .write()
            .expect("cache lock")
            .insert((a.to_string(), b.to_string(), provider_id.to_string()), entry.clone());
        Ok(entry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_keys() {
        let c = CountCache::in_memory();
        c.insert("rider", "horse", 7, "p").unwrap();
        assert_eq!(c.get("horse", "rider", "p").unwrap().count, 7);
        assert_eq!(c.get("rider", "horse", "p").unwrap().count, 7);
        assert!(c.get("horse", "rider", "other").is_none());
        assert_eq!(c.len(), 1);
        assert!(c.insert("a\tb", "c", 1, "p").is_err());
    }

    #[test]
    fn persists_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counts.tsv");
        {
            let c = CountCache::open(&path).unwrap();
            c.insert("x", "x", 123_456_789_012, "engine").unwrap();
            c.insert("y", "x", 5, "engine").unwrap();
            c.insert("x", "y", 6, "engine").unwrap();
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().all(|l| l.starts_with("x\t")));
        let c = CountCache::open(&path).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.get("x", "x", "engine").unwrap().count, 123_456_789_012);
        assert_eq!(c.get("y", "x", "engine").unwrap().count, 6);
    }

    #[test]
    fn malformed_file_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.tsv");
        std::fs::write(&path, "a\ta\t1\tp\t0\nb\ta\t1\tp\t0\n").unwrap();
        match CountCache::open(&path).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
    }
}
