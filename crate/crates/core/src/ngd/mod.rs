//! Normalized Google distance over page or document counts.

mod cache;
mod corpus;
mod live;

pub use cache::{canonical_pair, CacheEntry, CountCache};
pub use corpus::{tokenize, CorpusIndex};
pub use live::{HttpResponse, LiveConfig, LiveProvider, Transport, UreqTransport};

use log::warn;

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;

/// Finite stand-in for `+∞` (never co-occurring terms) in assembled matrices.
pub const DEFAULT_CEILING: f64 = 2.0;

/// Source of page counts `f(x)`, `f(x, y)` and the universe size `M`.
pub trait CountProvider: Send + Sync {
    /// Identifies the count source in caches and reports.
    fn id(&self) -> &str;

    /// Number of pages containing `term`; 0 for unknown terms.
    fn count(&self, term: &str) -> Result<u64>;

    /// Number of pages containing both terms. Must equal `count(x)` when `x == y`.
    fn pair_count(&self, x: &str, y: &str) -> Result<u64>;

    /// `M`, the number of pages indexed.
    fn universe_size(&self) -> f64;

    /// The normalizer `N` summed over all singleton and doubleton events, when known.
    fn exact_normalizer(&self) -> Option<f64> {
        None
    }

    /// `N` used when the caller does not override it.
    fn default_normalizer(&self) -> f64 {
        self.universe_size()
    }
}

impl<P: CountProvider + ?Sized> CountProvider for &P {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn count(&self, term: &str) -> Result<u64> {
        (**self).count(term)
    }
    fn pair_count(&self, x: &str, y: &str) -> Result<u64> {
        (**self).pair_count(x, y)
    }
    fn universe_size(&self) -> f64 {
        (**self).universe_size()
    }
    fn exact_normalizer(&self) -> Option<f64> {
        (**self).exact_normalizer()
    }
    fn default_normalizer(&self) -> f64 {
        (**self).default_normalizer()
    }
}

/// An NGD value with the anomalies met while computing it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ngd {
    pub value: f64,
    /// `f(x,y) > min(f(x), f(y))`: the counts are not set sizes.
    pub inconsistent: bool,
    /// The numerator came out negative and was clamped to 0.
    pub clamped: bool,
}

fn check_normalizer(n: f64, fx: f64, fy: f64) -> Result<()> {
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::Argument(format!("N must be positive and finite, got {n}")));
    }
    if n < fx.max(fy) {
        return Err(Error::Argument(format!(
            "N = {n} is smaller than the largest count {}",
            fx.max(fy)
        )));
    }
    Ok(())
}

/// `(max{log f(x), log f(y)} - log f(x,y)) / (log N - min{log f(x), log f(y)})`
/// in base 2, with the anomaly flags. `+∞` when `f(x,y) = 0`.
pub fn ngd_from_counts_checked(fx: f64, fy: f64, fxy: f64, n: f64) -> Result<Ngd> {
    if !(fx > 0.0 && fy > 0.0) || fxy < 0.0 {
        return Err(Error::Argument(format!(
            "counts must satisfy f(x) > 0, f(y) > 0, f(x,y) ≥ 0; got {fx}, {fy}, {fxy}"
        )));
    }
    check_normalizer(n, fx, fy)?;
    let inconsistent = fxy > fx.min(fy);
    if fxy == 0.0 {
        return Ok(Ngd { value: f64::INFINITY, inconsistent, clamped: false });
    }
    let (lx, ly) = (fx.log2(), fy.log2());
    let mut num = lx.max(ly) - fxy.log2();
    let den = n.log2() - lx.min(ly);
    let clamped = num < 0.0;
    if clamped {
        num = 0.0;
    }
    let value = if num == 0.0 {
        0.0
    } else if den <= 0.0 {
        f64::INFINITY
    } else {
        num / den
    };
    Ok(Ngd { value, inconsistent, clamped })
}

/// NGD from raw counts; see [`ngd_from_counts_checked`].
pub fn ngd_from_counts(fx: f64, fy: f64, fxy: f64, n: f64) -> Result<f64> {
    Ok(ngd_from_counts_checked(fx, fy, fxy, n)?.value)
}

/// NGD of two terms under `provider` with normalizer `n`, plus anomaly flags.
pub fn ngd_checked<P: CountProvider + ?Sized>(provider: &P, x: &str, y: &str, n: f64) -> Result<Ngd> {
    let fx = provider.count(x)?;
    let fy = if x == y { fx } else { provider.count(y)? };
    let unknown: Vec<String> = [(x, fx), (y, fy)]
        .iter()
        .filter(|(_, f)| *f == 0)
        .map(|(t, _)| t.to_string())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownTerm(unknown));
    }
    if x == y {
        check_normalizer(n, fx as f64, fx as f64)?;
        return Ok(Ngd { value: 0.0, inconsistent: false, clamped: false });
    }
    let fxy = provider.pair_count(x, y)?;
    let out = ngd_from_counts_checked(fx as f64, fy as f64, fxy as f64, n)?;
    if out.inconsistent {
        warn!(
            "{}: f({x},{y}) = {fxy} exceeds min(f({x}) = {fx}, f({y}) = {fy}); using it as-is",
            provider.id()
        );
    }
    Ok(out)
}

/// NGD of two terms under `provider` with normalizer `n`.
pub fn ngd<P: CountProvider + ?Sized>(provider: &P, x: &str, y: &str, n: f64) -> Result<f64> {
    Ok(ngd_checked(provider, x, y, n)?.value)
}

/// Terms with zero count, in input order without repeats.
pub fn unknown_terms<P: CountProvider + ?Sized>(provider: &P, terms: &[String]) -> Result<Vec<String>> {
    let mut out: Vec<String> = Vec::new();
    for t in terms {
        if provider.count(t)? == 0 && !out.contains(t) {
            out.push(t.clone());
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct NgdMatrixReport {
    pub matrix: DistanceMatrix,
    /// Pairs `(i, j)` whose infinite distance was replaced by the ceiling.
    pub ceiling_entries: Vec<(usize, usize)>,
    /// Pairs with inconsistent counts.
    pub inconsistent_entries: Vec<(usize, usize)>,
}

/// Pairwise NGD matrix over `terms`; infinite entries become `ceiling`.
pub fn ngd_matrix<P: CountProvider + ?Sized>(
    provider: &P,
    terms: &[String],
    n: f64,
    ceiling: f64,
) -> Result<NgdMatrixReport> {
    crate::matrix::check_unique_labels(terms)?;
    if !(ceiling.is_finite() && ceiling >= 0.0) {
        return Err(Error::Argument(format!("ceiling must be finite and ≥ 0, got {ceiling}")));
    }
    let unknown = unknown_terms(provider, terms)?;
    if !unknown.is_empty() {
        return Err(Error::UnknownTerm(unknown));
    }
    let k = terms.len();
    let mut values = vec![0.0; k * k];
    let mut ceiling_entries = Vec::new();
    let mut inconsistent_entries = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let d = ngd_checked(provider, &terms[i], &terms[j], n)?;
            let v = if d.value.is_infinite() {
                ceiling_entries.push((i, j));
                ceiling
            } else {
                d.value
            };
            if d.inconsistent {
                inconsistent_entries.push((i, j));
            }
            values[i * k + j] = v;
            values[j * k + i] = v;
        }
    }
    let matrix = DistanceMatrix::from_fn(terms.to_vec(), |i, j| values[i * k + j])?;
    Ok(NgdMatrixReport { matrix, ceiling_entries, inconsistent_entries })
}

/// The Google distribution over a finite vocabulary: singleton and doubleton
/// event counts divided by their total `N`.
#[derive(Clone, Debug)]
pub struct GoogleDistribution {
    terms: Vec<String>,
    /// Row-major `k × k`; the diagonal holds singleton counts.
    counts: Vec<u64>,
    normalizer: f64,
}

impl GoogleDistribution {
    pub fn new<P: CountProvider + ?Sized>(provider: &P, terms: &[String]) -> Result<Self> {
        crate::matrix::check_unique_labels(terms)?;
        let k = terms.len();
        let mut counts = vec![0u64; k * k];
        let mut total: u128 = 0;
        for i in 0..k {
            for j in i..k {
                let c = if i == j {
                    provider.count(&terms[i])?
                } else {
                    provider.pair_count(&terms[i], &terms[j])?
                };
                counts[i * k + j] = c;
                counts[j * k + i] = c;
                total += c as u128;
            }
        }
        if total == 0 {
            return Err(Error::DegenerateInput("no term of the vocabulary occurs".into()));
        }
        Ok(GoogleDistribution { terms: terms.to_vec(), counts, normalizer: total as f64 })
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// `N`: total count over all singleton and unordered doubleton events.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    fn index(&self, term: &str) -> Result<usize> {
        self.terms
            .iter()
            .position(|t| t == term)
            .ok_or_else(|| Error::UnknownTerm(vec![term.to_string()]))
    }

    fn event_count(&self, x: &str, y: &str) -> Result<u64> {
        let (i, j) = (self.index(x)?, self.index(y)?);
        Ok(self.counts[i * self.terms.len() + j])
    }

    /// `g(x, y)`; `g(x) = g(x, x)`.
    pub fn g(&self, x: &str, y: &str) -> Result<f64> {
        Ok(self.event_count(x, y)? as f64 / self.normalizer)
    }

    /// `G(x, y) = log2 1/g(x, y)` in bits; `+∞` for impossible events.
    pub fn google_code(&self, x: &str, y: &str) -> Result<f64> {
        let c = self.event_count(x, y)?;
        Ok(if c == 0 { f64::INFINITY } else { self.normalizer.log2() - (c as f64).log2() })
    }

    /// Sum of `g` over singletons and unordered distinct pairs.
    pub fn total_mass(&self) -> f64 {
        let k = self.terms.len();
        let mut s = 0u128;
        for i in 0..k {
            for j in i..k {
                s += self.counts[i * k + j] as u128;
            }
        }
        s as f64 / self.normalizer
    }

    /// NGD in code-length form: `(G(x,y) - min{G(x), G(y)}) / max{G(x), G(y)}`.
    pub fn ngd(&self, x: &str, y: &str) -> Result<f64> {
        let (gx, gy) = (self.google_code(x, x)?, self.google_code(y, y)?);
        if gx.is_infinite() || gy.is_infinite() {
            let unknown = [(x, gx), (y, gy)]
                .iter()
                .filter(|(_, g)| g.is_infinite())
                .map(|(t, _)| t.to_string())
                .collect();
            return Err(Error::UnknownTerm(unknown));
        }
        if x == y {
            return Ok(0.0);
        }
        let gxy = self.google_code(x, y)?;
        Ok((gxy - gx.min(gy)) / gx.max(gy))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> CorpusIndex {
        // a in docs 1-4, b in docs 3-6, docs 7 and 8 empty
        let docs = ["a", "a", "a b", "a b", "b", "b", "", ""];
        CorpusIndex::from_texts(docs.iter().copied()).unwrap()
    }

    fn terms(t: &[&str]) -> Vec<String> {
        t.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn horse_rider() {
        let v = ngd_from_counts(46_700_000.0, 12_200_000.0, 2_630_000.0, 8_058_044_651.0).unwrap();
        assert!((v - 0.443).abs() <= 0.0005, "{v}");
        let v = ngd_from_counts(23_700_000.0, 6_270_000.0, 1_180_000.0, 4_285_199_774.0).unwrap();
        assert!((v - 0.460).abs() <= 0.0005, "{v}");
    }

    #[test]
    fn toy_corpus_values() {
        let p = toy();
        assert_eq!(ngd(&p, "a", "b", 8.0).unwrap(), 1.0);
        assert_eq!(ngd(&p, "a", "a", 8.0).unwrap(), 0.0);
        assert!(matches!(ngd(&p, "a", "zebra", 8.0), Err(Error::UnknownTerm(t)) if t == ["zebra"]));
        assert!(matches!(ngd(&p, "a", "b", 3.0), Err(Error::Argument(_))));

        let dist = GoogleDistribution::new(&p, &terms(&["a", "b"])).unwrap();
        assert_eq!(dist.normalizer(), 10.0);
        assert_eq!(dist.g("a", "a").unwrap(), 0.4);
        assert_eq!(dist.g("b", "b").unwrap(), 0.4);
        assert_eq!(dist.g("a", "b").unwrap(), 0.2);
        assert!((dist.total_mass() - 1.0).abs() < 1e-12);
        assert!((dist.google_code("a", "b").unwrap() - 5f64.log2()).abs() < 1e-12);
        let via_counts = ngd(&p, "a", "b", dist.normalizer()).unwrap();
        assert!((dist.ngd("a", "b").unwrap() - via_counts).abs() < 1e-9);
    }

    #[test]
    fn single_event_universe() {
        let p = CorpusIndex::from_texts(["t"]).unwrap();
        let dist = GoogleDistribution::new(&p, &terms(&["t"])).unwrap();
        assert_eq!(dist.normalizer(), 1.0);
        assert_eq!(dist.g("t", "t").unwrap(), 1.0);
        assert_eq!(dist.google_code("t", "t").unwrap(), 0.0);
    }

    #[test]
    fn matrix_assembly() {
        let p = toy();
        let r = ngd_matrix(&p, &terms(&["a", "b"]), 8.0, DEFAULT_CEILING).unwrap();
        assert_eq!(r.matrix.get(0, 1), 1.0);
        assert_eq!(r.matrix.get(1, 0), 1.0);
        assert_eq!(r.matrix.get(0, 0), 0.0);
        assert!(r.ceiling_entries.is_empty());

        assert!(ngd_matrix(&p, &terms(&["a", "a"]), 8.0, 2.0).is_err());
        let err = ngd_matrix(&p, &terms(&["q", "a", "r"]), 8.0, 2.0).unwrap_err();
        assert!(matches!(err, Error::UnknownTerm(t) if t == ["q", "r"]));

        let p = CorpusIndex::from_texts(["x y", "y z", "x", "z"]).unwrap();
        let r = ngd_matrix(&p, &terms(&["x", "y", "z"]), 4.0, DEFAULT_CEILING).unwrap();
        assert_eq!(r.ceiling_entries, vec![(0, 2)]);
        assert_eq!(r.matrix.get(2, 0), DEFAULT_CEILING);
    }

    #[test]
    fn inconsistent_counts_are_flagged_and_clamped() {
        let d = ngd_from_counts_checked(10.0, 20.0, 30.0, 100.0).unwrap();
        assert!(d.inconsistent && d.clamped);
        assert_eq!(d.value, 0.0);
        let d = ngd_from_counts_checked(10.0, 20.0, 15.0, 100.0).unwrap();
        assert!(d.inconsistent && !d.clamped);
        assert!(d.value > 0.0);
    }

    proptest! {
        #[test]
        fn base_invariance(fx in 1u64..1_000_000, fy in 1u64..1_000_000, frac in 0.0f64..1.0, extra in 0u64..1_000_000_000) {
            let fxy = ((fx.min(fy) as f64) * frac).floor().max(1.0);
            let n = (fx.max(fy) + extra) as f64;
            let (fx, fy) = (fx as f64, fy as f64);
            let natural = (fx.ln().max(fy.ln()) - fxy.ln()) / (n.ln() - fx.ln().min(fy.ln()));
            let v = ngd_from_counts(fx, fy, fxy, n).unwrap();
            if natural.is_finite() {
                prop_assert!((v - natural).abs() <= 1e-12 * natural.abs().max(1.0));
                prop_assert!(v >= 0.0);
            }
        }

        #[test]
        fn decreasing_in_n(fx in 1u64..10_000, fy in 1u64..10_000, frac in 0.01f64..0.99, n0 in 0u64..100_000, dn in 1u64..100_000) {
            let fxy = ((fx.min(fy) as f64) * frac).ceil();
            let (fx, fy) = (fx as f64, fy as f64);
            let n = fx.max(fy) + n0 as f64 + 1.0;
            let a = ngd_from_counts(fx, fy, fxy, n).unwrap();
            let b = ngd_from_counts(fx, fy, fxy, n + dn as f64).unwrap();
            if a > 0.0 {
                prop_assert!(b < a);
            }
        }
    }
}
