use std::collections::{BTreeMap, BTreeSet};

use unicode_segmentation::UnicodeSegmentation;

use crate::error::{Error, Result};

use super::CountProvider;

/// Unicode word segmentation, lowercased, no stemming.
pub fn tokenize(text: &str) -> Vec<String> {
    text.unicode_words().map(str::to_lowercase).collect()
}

/// Offline document-count provider: `f(x)` is the number of documents
/// containing `x` at least once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusIndex {
    documents: usize,
    postings: BTreeMap<String, Vec<u32>>,
    normalizer: u64,
    max_terms: usize,
}

impl CorpusIndex {
    /// Builds the index from already tokenized documents.
    pub fn build<D, T>(documents: impl IntoIterator<Item = D>) -> Result<Self>
    where
        D: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let mut postings: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        let mut normalizer = 0u64;
        let mut max_terms = 0;
        let mut count = 0usize;
        for (id, doc) in documents.into_iter().enumerate() {
            let id = u32::try_from(id)
                .map_err(|_| Error::Argument("corpus exceeds 2^32 documents".into()))?;
            let distinct: BTreeSet<String> = doc.into_iter().map(|t| t.as_ref().to_string()).collect();
            let t = distinct.len() as u64;
            normalizer += t * (t + 1) / 2;
            max_terms = max_terms.max(distinct.len());
            for term in distinct {
                postings.entry(term).or_default().push(id);
            }
            count += 1;
        }
        Self::from_parts(count, postings, normalizer, max_terms)
    }

    /// Tokenizes each text with [`tokenize`] and indexes it as one document.
    pub fn from_texts<'a>(texts: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        Self::build(texts.into_iter().map(tokenize))
    }

    /// Reassembles an index from postings; recomputes `N` and the per-document maximum.
    pub fn from_postings(documents: usize, postings: BTreeMap<String, Vec<u32>>) -> Result<Self> {
        let mut per_doc = vec![0u64; documents];
        for (term, ids) in &postings {
            if ids.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Argument(format!("postings of '{term}' are not strictly increasing")));
            }
            for &id in ids {
                let slot = per_doc.get_mut(id as usize).ok_or_else(|| {
                    Error::Argument(format!("'{term}' names document {id} of {documents}"))
                })?;
                *slot += 1;
            }
        }
        let normalizer = per_doc.iter().map(|t| t * (t + 1) / 2).sum();
        let max_terms = per_doc.iter().copied().max().unwrap_or(0) as usize;
        Self::from_parts(documents, postings, normalizer, max_terms)
    }

    fn from_parts(
        documents: usize,
        postings: BTreeMap<String, Vec<u32>>,
        normalizer: u64,
        max_terms: usize,
    ) -> Result<Self> {
        if documents == 0 {
            return Err(Error::Argument("corpus has no documents".into()));
        }
        Ok(CorpusIndex { documents, postings, normalizer, max_terms })
    }

    /// `M`. Documents without any term count here but add no events to `N`,
    /// so `M <= N` needs every document to hold at least one term.
    pub fn document_count(&self) -> usize {
        self.documents
    }

    /// Sorted vocabulary.
    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn postings(&self) -> &BTreeMap<String, Vec<u32>> {
        &self.postings
    }

    /// Exact `N`: singleton plus doubleton events summed over all documents.
    pub fn normalizer(&self) -> u64 {
        self.normalizer
    }

    /// Most distinct terms in any one document.
    pub fn max_terms_per_document(&self) -> usize {
        self.max_terms
    }

    /// Most singleton plus doubleton events contributed by one document,
    /// `t(t+1)/2` for `t` distinct terms; bounds `N` by `alpha * M`.
    pub fn alpha(&self) -> u64 {
        let t = self.max_terms as u64;
        t * (t + 1) / 2
    }

    fn docs(&self, term: &str) -> &[u32] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }
}

fn intersection_size(a: &[u32], b: &[u32]) -> u64 {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

impl CountProvider for CorpusIndex {
    fn id(&self) -> &str {
        "corpus"
    }

    fn count(&self, term: &str) -> Result<u64> {
        Ok(self.docs(term).len() as u64)
    }

    fn pair_count(&self, x: &str, y: &str) -> Result<u64> {
        Ok(intersection_size(self.docs(x), self.docs(y)))
    }

    fn universe_size(&self) -> f64 {
        self.documents as f64
    }

    fn exact_normalizer(&self) -> Option<f64> {
        Some(self.normalizer as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ngd::GoogleDistribution;
    use crate::synth::rng;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn toy_counts() {
        let docs = ["a", "a", "a b", "a b", "b", "b", "", ""];
        let p = CorpusIndex::from_texts(docs).unwrap();
        assert_eq!(p.count("a").unwrap(), 4);
        assert_eq!(p.count("b").unwrap(), 4);
        assert_eq!(p.pair_count("a", "b").unwrap(), 2);
        assert_eq!(p.pair_count("a", "a").unwrap(), 4);
        assert_eq!(p.count("c").unwrap(), 0);
        assert_eq!(p.universe_size(), 8.0);
        assert_eq!(p.normalizer(), 10);
        assert!(CorpusIndex::from_texts(Vec::<&str>::new()).is_err());
    }

    #[test]
    fn tokenizer_folds_case_and_punctuation() {
        assert_eq!(tokenize("The Horse, the RIDER!"), ["the", "horse", "the", "rider"]);
        assert_eq!(tokenize("Ça va?"), ["ça", "va"]);
    }

    #[test]
    fn postings_round_trip() {
        let p = CorpusIndex::from_texts(["x y z", "y", "", "z x"]).unwrap();
        let q = CorpusIndex::from_postings(p.document_count(), p.postings().clone()).unwrap();
        assert_eq!(p, q);
        let mut bad = p.postings().clone();
        bad.insert("w".into(), vec![9]);
        assert!(CorpusIndex::from_postings(4, bad).is_err());
    }

    fn random_corpus(seed: u64) -> CorpusIndex {
        let mut r = rng(seed);
        let vocab = r.random_range(1..=30);
        let docs = r.random_range(1..=100);
        CorpusIndex::build((0..docs).map(|_| {
            let len = r.random_range(1..12);
            (0..len).map(|_| format!("t{}", r.random_range(0..vocab))).collect::<Vec<_>>()
        }))
        .unwrap()
    }

    proptest! {
        #[test]
        fn normalization_and_bounds(seed in any::<u64>()) {
            let p = random_corpus(seed);
            let vocab: Vec<String> = p.vocabulary().map(String::from).collect();
            prop_assume!(!vocab.is_empty());
            let g = GoogleDistribution::new(&p, &vocab).unwrap();
            prop_assert_eq!(g.normalizer(), p.normalizer() as f64);
            prop_assert!((g.total_mass() - 1.0).abs() <= 1e-9);
            let m = p.document_count() as u64;
            prop_assert!(m <= p.normalizer());
            prop_assert!(p.normalizer() <= p.alpha() * m);
        }

        #[test]
        fn pair_counts_are_set_sizes(seed in any::<u64>()) {
            let p = random_corpus(seed);
            let vocab: Vec<String> = p.vocabulary().map(String::from).collect();
            for x in &vocab {
                for y in &vocab {
                    let f = p.pair_count(x, y).unwrap();
                    prop_assert!(f <= p.count(x).unwrap().min(p.count(y).unwrap()));
                    prop_assert_eq!(f, p.pair_count(y, x).unwrap());
                }
            }
        }
    }
}
