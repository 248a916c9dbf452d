//! Compression distance `E_C`, the normalized compression distance and
//! pairwise distance matrices over labeled byte strings.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use rayon::prelude::*;

use crate::compress::{concat, window_warning, Compressor};
use crate::error::{Error, Result};
use crate::matrix::{check_unique_labels, DistanceMatrix};

/// A labeled, immutable byte string compared literally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataObject {
    label: String,
    bytes: Arc<[u8]>,
}

impl DataObject {
    pub fn new(label: impl Into<String>, bytes: impl Into<Arc<[u8]>>) -> Self {
        DataObject {
            label: label.into(),
            bytes: bytes.into(),
        }
    }

    /// Reads a whole file; the label is the file name.
    pub fn from_file(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let label = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Ok(DataObject::new(label, bytes))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }
}

/// Expands directories into their regular files in name order.
pub fn expand_paths<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = Vec::new();
    for p in paths {
        let p = p.as_ref();
        let meta = fs::metadata(p).map_err(|e| Error::io(p, e))?;
        if meta.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|e| e.is_file())
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(p.to_path_buf());
        }
    }
    Ok(files)
}

/// Loads files; directories contribute their regular files in name order.
pub fn load_objects<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<DataObject>> {
    let objects = expand_paths(paths)?
        .iter()
        .map(|f| DataObject::from_file(f))
        .collect::<Result<Vec<_>>>()?;
    check_unique_labels(&objects.iter().map(|o| o.label()).collect::<Vec<_>>())?;
    Ok(objects)
}

/// Default bound on how far above 1 an NCD may go before it is flagged.
pub const DEFAULT_EPS_MAX: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NcdOptions {
    pub eps_max: f64,
    /// Clamp entries into `[0, 1]` after flagging.
    pub clamp: bool,
}

impl Default for NcdOptions {
    fn default() -> Self {
        NcdOptions {
            eps_max: DEFAULT_EPS_MAX,
            clamp: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ncd {
    pub value: f64,
    pub out_of_range: bool,
}

pub fn is_out_of_range(value: f64, eps_max: f64) -> bool {
    !(0.0..=1.0 + eps_max).contains(&value)
}

/// Caches `C(x)` per object so a matrix build compresses each object once.
///
/// Entries are keyed by the object's shared byte buffer; the cache holds a
/// reference to the buffer so the key stays valid.
type LengthCache = HashMap<(usize, usize), (Arc<[u8]>, u64)>;

pub struct NcdEngine<C> {
    backend: C,
    cache: RwLock<LengthCache>,
}

impl<C: Compressor> NcdEngine<C> {
    pub fn new(backend: C) -> Self {
        NcdEngine {
            backend,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn backend(&self) -> &C {
        &self.backend
    }

    pub fn code_length(&self, x: &DataObject) -> Result<u64> {
        let key = (x.bytes.as_ptr() as usize, x.bytes.len());
        if let Some((_, bits)) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(*bits);
        }
        let bits = self.backend.code_length(x.bytes())?;
        self.cache
            .write()
            .expect("cache lock")
            .insert(key, (Arc::clone(&x.bytes), bits));
        Ok(bits)
    }

    fn pair(&self, x: &DataObject, y: &DataObject) -> Result<(u64, u64, u64)> {
        let cx = self.code_length(x)?;
        let cy = self.code_length(y)?;
        let cxy = self.backend.code_length(&concat(x.bytes(), y.bytes()))?;
        Ok((cx, cy, cxy))
    }

    pub fn e_c(&self, x: &DataObject, y: &DataObject) -> Result<i64> {
        let (cx, cy, cxy) = self.pair(x, y)?;
        Ok(cxy as i64 - cx.min(cy) as i64)
    }

    pub fn ncd(&self, x: &DataObject, y: &DataObject) -> Result<f64> {
        let (cx, cy, cxy) = self.pair(x, y)?;
        ncd_from_lengths(cx, cy, cxy, x, y)
    }

    /// Pairwise NCD over `objects`; the pair `{i, j}` with `i < j` is
    /// computed once on `x_i ‖ x_j` and mirrored.
    pub fn distance_matrix(&self, objects: &[DataObject], opts: NcdOptions) -> Result<MatrixReport> {
        let n = objects.len();
        if n < 2 {
            return Err(Error::Argument(format!(
                "distance matrix needs at least 2 objects, got {n}"
            )));
        }
        check_unique_labels(&objects.iter().map(|o| o.label()).collect::<Vec<_>>())?;
        let mut warnings: Vec<String> = objects
            .iter()
            .filter_map(|o| window_warning(&self.backend, o.len()))
            .collect();
        warnings.dedup();

        objects
            .par_iter()
            .map(|o| self.code_length(o).map(|_| ()))
            .collect::<Result<()>>()?;
        let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let values: Vec<f64> = cells
            .par_iter()
            .map(|&(i, j)| self.ncd(&objects[i], &objects[j]))
            .collect::<Result<_>>()?;
        let lookup: HashMap<(usize, usize), f64> = cells.into_iter().zip(values).collect();

        let mut out_of_range = Vec::new();
        for (&(i, j), &v) in &lookup {
            if is_out_of_range(v, opts.eps_max) {
                out_of_range.push((i, j, v));
            }
        }
        out_of_range.sort_by_key(|&(i, j, _)| (i, j));
        for &(i, j, v) in &out_of_range {
            log::warn!(
                "NCD({}, {}) = {v} outside [0, 1 + {}]",
                objects[i].label(),
                objects[j].label(),
                opts.eps_max
            );
        }

        let labels = objects.iter().map(|o| o.label().to_string()).collect();
        let matrix = DistanceMatrix::from_fn(labels, |i, j| {
            let v = lookup[&(i, j)];
            if opts.clamp {
                v.clamp(0.0, 1.0)
            } else {
                v
            }
        })?;
        Ok(MatrixReport {
            matrix,
            out_of_range,
            warnings,
        })
    }
}

#[derive(Clone, Debug)]
pub struct MatrixReport {
    pub matrix: DistanceMatrix,
    /// `(i, j, raw value)` for entries outside `[0, 1 + eps_max]`.
    pub out_of_range: Vec<(usize, usize, f64)>,
    pub warnings: Vec<String>,
}

fn ncd_from_lengths(cx: u64, cy: u64, cxy: u64, x: &DataObject, y: &DataObject) -> Result<f64> {
    let max = cx.max(cy);
    if max == 0 {
        return Err(Error::DegenerateInput(format!(
            "both '{}' and '{}' compress to 0 bits",
            x.label(),
            y.label()
        )));
    }
    Ok((cxy as f64 - cx.min(cy) as f64) / max as f64)
}

/// `E_C(x, y) = C(xy) - min{C(x), C(y)}` in bits.
pub fn e_c<C: Compressor + ?Sized>(backend: &C, x: &DataObject, y: &DataObject) -> Result<i64> {
    let cx = backend.code_length(x.bytes())?;
    let cy = backend.code_length(y.bytes())?;
    let cxy = backend.code_length(&concat(x.bytes(), y.bytes()))?;
    Ok(cxy as i64 - cx.min(cy) as i64)
}

/// `E_C^+(x, y) = max{C(x), C(y)}`, the normalizer of the NCD.
pub fn e_c_plus<C: Compressor + ?Sized>(backend: &C, x: &DataObject, y: &DataObject) -> Result<u64> {
    Ok(backend.code_length(x.bytes())?.max(backend.code_length(y.bytes())?))
}

/// `NCD(x, y) = (C(xy) - min{C(x), C(y)}) / max{C(x), C(y)}`, unclamped.
pub fn ncd<C: Compressor + ?Sized>(backend: &C, x: &DataObject, y: &DataObject) -> Result<f64> {
    let cx = backend.code_length(x.bytes())?;
    let cy = backend.code_length(y.bytes())?;
    let cxy = backend.code_length(&concat(x.bytes(), y.bytes()))?;
    ncd_from_lengths(cx, cy, cxy, x, y)
}

/// [`ncd`] with the out-of-range flag for `eps_max`.
pub fn ncd_flagged<C: Compressor + ?Sized>(
    backend: &C,
    x: &DataObject,
    y: &DataObject,
    eps_max: f64,
) -> Result<Ncd> {
    let value = ncd(backend, x, y)?;
    let out_of_range = is_out_of_range(value, eps_max);
    if out_of_range {
        log::warn!("NCD({}, {}) = {value} outside [0, 1 + {eps_max}]", x.label(), y.label());
    }
    Ok(Ncd {
        value,
        out_of_range,
    })
}

/// Convenience wrapper building a fresh [`NcdEngine`].
pub fn distance_matrix<C: Compressor>(
    backend: C,
    objects: &[DataObject],
    opts: NcdOptions,
) -> Result<MatrixReport> {
    NcdEngine::new(backend).distance_matrix(objects, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compress::{Backend, IDENTITY_HEADER_BITS};
    use crate::synth;

    struct Zero;
    impl Compressor for Zero {
        fn name(&self) -> &str {
            "zero"
        }
        fn code_length(&self, _: &[u8]) -> Result<u64> {
            Ok(0)
        }
    }

    fn obj(label: &str, bytes: Vec<u8>) -> DataObject {
        DataObject::new(label, bytes)
    }

    #[test]
    fn degenerate_input_rejected() {
        let x = obj("x", vec![]);
        assert!(matches!(ncd(&Zero, &x, &x), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn identity_backend_values() {
        let b = Backend::identity();
        let x = obj("x", vec![1; 100]);
        let y = obj("y", vec![2; 50]);
        // C(xy) = 64 + 1200, min = 64 + 400, max = 64 + 800
        assert_eq!(e_c(&b, &x, &y).unwrap(), 800);
        assert_eq!(e_c_plus(&b, &x, &y).unwrap(), 800 + IDENTITY_HEADER_BITS);
        assert_eq!(ncd(&b, &x, &y).unwrap(), 800.0 / 864.0);
    }

    #[test]
    fn self_distance_small() {
        let x = obj("x", synth::markov_text(4096, 5));
        for b in [Backend::deflate(), Backend::block_sorting()] {
            let v = ncd(&b, &x, &x).unwrap();
            assert!((0.0..=0.05).contains(&v), "{}: {v}", b.family());
        }
    }

    #[test]
    fn e_c_cases() {
        let d = Backend::deflate();
        let x = obj("x", synth::random_bytes(4096, 21));
        let y = obj("y", synth::random_bytes(4096, 22));
        let tau = crate::compress::Tolerance::default();
        assert!((e_c(&d, &x, &x).unwrap() as f64) <= tau.bits(8192));
        let cy = d.code_length(y.bytes()).unwrap() as f64;
        assert!((e_c(&d, &x, &y).unwrap() as f64 - cy).abs() <= tau.bits(8192));
        let empty = obj("e", vec![]);
        let header = d.code_length(&[]).unwrap() as f64;
        assert!((e_c(&d, &empty, &y).unwrap() as f64 - (cy - header)).abs() <= tau.bits(4096));
    }

    #[test]
    fn engine_matches_free_function() {
        let objs: Vec<DataObject> = (0..4)
            .map(|i| obj(&format!("o{i}"), synth::markov_text(2000, i)))
            .collect();
        let b = Backend::deflate();
        let report = distance_matrix(&b, &objs, NcdOptions::default()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let (a, c) = if i <= j { (i, j) } else { (j, i) };
                let fresh = ncd(&b, &objs[a], &objs[c]).unwrap();
                assert_eq!(report.matrix.get(i, j).to_bits(), fresh.to_bits());
            }
        }
    }

    #[test]
    fn matrix_rejects_duplicates_and_tiny_sets() {
        let b = Backend::identity();
        let a = obj("a", vec![1]);
        assert!(distance_matrix(&b, std::slice::from_ref(&a), NcdOptions::default()).is_err());
        assert!(distance_matrix(&b, &[a.clone(), a], NcdOptions::default()).is_err());
    }

    #[test]
    fn out_of_range_flag() {
        assert!(is_out_of_range(1.25, 0.2));
        assert!(is_out_of_range(-0.01, 0.2));
        assert!(!is_out_of_range(1.2, 0.2));
    }
}
