//! Seeded synthetic data used by the examples, the CLI fixtures and the tests.
//!
//! Every generator is a pure function of its arguments.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::matrix::DistanceMatrix;
use crate::ncd::DataObject;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_bytes(len: usize, seed: u64) -> Vec<u8> {
    let mut r = rng(seed);
    let mut out = vec![0u8; len];
    r.fill(&mut out[..]);
    out
}

/// Word-bigram Markov source over a pseudo-word vocabulary.
pub struct MarkovSource {
    words: Vec<String>,
    successors: Vec<Vec<usize>>,
}

impl MarkovSource {
    pub fn new(chain_seed: u64) -> Self {
        let mut r = rng(chain_seed ^ 0x6d61_726b_6f76);
        let letters = b"etaoinshrdlcumwfgypbvkjxqz";
        let words: Vec<String> = (0..120)
            .map(|_| {
                let len = r.random_range(1..8);
                (0..len)
                    .map(|_| {
                        // skew toward frequent letters
                        let i = (r.random::<f64>().powi(2) * letters.len() as f64) as usize;
                        letters[i] as char
                    })
                    .collect()
            })
            .collect();
        let successors = (0..words.len())
            .map(|_| (0..6).map(|_| r.random_range(0..words.len())).collect())
            .collect();
        MarkovSource { words, successors }
    }

    pub fn generate(&self, len: usize, seed: u64) -> Vec<u8> {
        let mut r = rng(seed);
        let mut out = String::with_capacity(len + 16);
        let mut w = r.random_range(0..self.words.len());
        let mut since_period = 0;
        while out.len() < len {
            out.push_str(&self.words[w]);
            since_period += 1;
            if since_period > 6 && r.random_bool(0.15) {
                out.push_str(".\n");
                since_period = 0;
            } else {
                out.push(' ');
            }
            let succ = &self.successors[w];
            // first successor dominates
            w = if r.random_bool(0.5) {
                succ[0]
            } else {
                *succ.choose(&mut r).expect("non-empty")
            };
            if r.random_bool(0.05) {
                w = r.random_range(0..self.words.len());
            }
        }
        out.truncate(len);
        out.into_bytes()
    }
}

/// `len` bytes of Markov text whose chain and sample both derive from `seed`.
pub fn markov_text(len: usize, seed: u64) -> Vec<u8> {
    MarkovSource::new(seed).generate(len, seed.wrapping_add(1))
}

/// Replaces each byte with probability `rate` by a draw from `alphabet`.
fn mutate_bytes(base: &[u8], rate: f64, alphabet: &[u8], r: &mut ChaCha8Rng) -> Vec<u8> {
    base.iter()
        .map(|&b| {
            if r.random_bool(rate) {
                *alphabet.choose(r).expect("non-empty alphabet")
            } else {
                b
            }
        })
        .collect()
}

/// Names of the generator families used by [`family_objects`].
pub const FAMILIES: [&str; 4] = ["text", "dna", "binary", "table"];

fn family_ancestor(family: usize, size: usize, seed: u64) -> (Vec<u8>, Vec<u8>) {
    let mut r = rng(seed);
    match family % 4 {
        0 => {
            let text = MarkovSource::new(seed).generate(size, seed + 1);
            (text, b"abcdefghijklmnopqrstuvwxyz ".to_vec())
        }
        1 => {
            let motifs: Vec<Vec<u8>> = (0..12)
                .map(|_| (0..r.random_range(4..12)).map(|_| *b"ACGT".choose(&mut r).unwrap()).collect())
                .collect();
            let mut s = Vec::with_capacity(size);
            while s.len() < size {
                if r.random_bool(0.3) {
                    s.extend_from_slice(motifs.choose(&mut r).unwrap());
                } else {
                    s.push(*b"ACGT".choose(&mut r).unwrap());
                }
            }
            s.truncate(size);
            (s, b"ACGT".to_vec())
        }
        2 => {
            let alphabet: Vec<u8> = (0..=255).collect();
            (random_bytes(size, seed), alphabet)
        }
        _ => {
            let mut s = String::with_capacity(size + 32);
            let mut row = 0u32;
            while s.len() < size {
                let a: u32 = r.random_range(0..5000);
                let b: f64 = r.random_range(0.0..1.0);
                s.push_str(&format!("{row},{a},{b:.4},{}\n", a % 7));
                row += 1;
            }
            s.truncate(size);
            (s.into_bytes(), b"0123456789,.".to_vec())
        }
    }
}

/// `families * per_family` objects of `size` bytes. Each family has one
/// ancestor from a distinct generator type; members are independent point
/// mutations of it. Labels are `<family>-<member>`.
pub fn family_objects(families: usize, per_family: usize, size: usize, seed: u64) -> Vec<DataObject> {
    let mut out = Vec::with_capacity(families * per_family);
    for f in 0..families {
        let fseed = seed.wrapping_mul(1000).wrapping_add(f as u64);
        let (ancestor, alphabet) = family_ancestor(f, size, fseed);
        let mut r = rng(fseed ^ 0xf00d);
        for m in 0..per_family {
            let bytes = mutate_bytes(&ancestor, 0.08, &alphabet, &mut r);
            let name = FAMILIES.get(f).map_or_else(|| format!("family{f}"), |n| n.to_string());
            out.push(DataObject::new(format!("{name}-{m}"), bytes));
        }
    }
    out
}

/// The 16-object fixture: 4 families of 4 objects, 4 KiB each.
pub fn standard_families() -> Vec<DataObject> {
    family_objects(4, 4, 4096, 2005)
}

/// The 10-sample suite for the normality harness: 5 Markov texts and 5
/// uniform random blocks of 4 KiB.
pub fn standard_normality_samples() -> Vec<Vec<u8>> {
    let mut v: Vec<Vec<u8>> = (0..5).map(|i| markov_text(4096, 100 + i)).collect();
    v.extend((0..5).map(|i| random_bytes(4096, 200 + i)));
    v
}

/// Symmetric matrix with zero diagonal and off-diagonal entries uniform in `[0, 1)`.
pub fn random_matrix(n: usize, seed: u64) -> DistanceMatrix {
    let mut r = rng(seed);
    let mut vals = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            vals[i * n + j] = r.random::<f64>();
        }
    }
    let labels = (0..n).map(|i| format!("o{i}")).collect();
    DistanceMatrix::from_fn(labels, |i, j| if i == j { 0.0 } else { vals[i * n + j] })
        .expect("unique labels")
}

/// Two isotropic Gaussian classes in `dim` dimensions whose means differ by
/// `separation` along every axis. Labels are `"pos"` and `"neg"`, interleaved.
pub fn gaussian_blobs(per_class: usize, dim: usize, separation: f64, seed: u64) -> Vec<(String, Vec<f64>)> {
    let mut r = rng(seed);
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    let mut out = Vec::with_capacity(2 * per_class);
    for _ in 0..per_class {
        for (label, shift) in [("pos", separation), ("neg", 0.0)] {
            let v = (0..dim).map(|_| shift + normal.sample(&mut r)).collect();
            out.push((label.to_string(), v));
        }
    }
    out
}

/// A document collection with planted term categories.
#[derive(Clone, Debug)]
pub struct CategoryCorpus {
    pub documents: Vec<Vec<String>>,
    /// Member terms of each category.
    pub categories: Vec<Vec<String>>,
    /// Generic terms not belonging to any category.
    pub general: Vec<String>,
}

impl CategoryCorpus {
    /// Every term in the corpus vocabulary outside category `c`.
    pub fn dictionary_without(&self, c: usize) -> Vec<String> {
        let mut v: Vec<String> = self.general.clone();
        for (i, cat) in self.categories.iter().enumerate() {
            if i != c {
                v.extend(cat.iter().cloned());
            }
        }
        v
    }
}

/// Generates `docs` documents over `categories` categories of `terms_per_category`
/// terms plus `general_terms` generic words. A document draws most of its
/// category terms from one topic, with occasional cross-topic terms.
pub fn category_corpus(
    categories: usize,
    terms_per_category: usize,
    general_terms: usize,
    docs: usize,
    seed: u64,
) -> CategoryCorpus {
    let mut r = rng(seed);
    let cats: Vec<Vec<String>> = (0..categories)
        .map(|c| (0..terms_per_category).map(|t| format!("c{c:02}t{t:03}")).collect())
        .collect();
    let general: Vec<String> = (0..general_terms).map(|g| format!("w{g:04}")).collect();
    // Zipf-like weights for generic words
    let zipf = |r: &mut ChaCha8Rng, n: usize| -> usize {
        let u: f64 = r.random();
        ((n as f64).powf(u) - 1.0).floor().min(n as f64 - 1.0) as usize
    };
    let mut documents = Vec::with_capacity(docs);
    for _ in 0..docs {
        let topic = r.random_range(0..categories);
        let mut doc = Vec::new();
        let topical = r.random_range(3..9);
        for _ in 0..topical {
            if r.random_bool(0.1) {
                let other = r.random_range(0..categories);
                doc.push(cats[other][r.random_range(0..terms_per_category)].clone());
            } else {
                doc.push(cats[topic][r.random_range(0..terms_per_category)].clone());
            }
        }
        for _ in 0..r.random_range(5..15) {
            doc.push(general[zipf(&mut r, general_terms)].clone());
        }
        doc.shuffle(&mut r);
        documents.push(doc);
    }
    CategoryCorpus {
        documents,
        categories: cats,
        general,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(random_bytes(64, 3), random_bytes(64, 3));
        assert_ne!(random_bytes(64, 3), random_bytes(64, 4));
        assert_eq!(markov_text(500, 9), markov_text(500, 9));
        assert_eq!(markov_text(500, 9).len(), 500);
        assert_eq!(standard_families(), standard_families());
    }

    #[test]
    fn family_labels() {
        let objs = family_objects(4, 2, 256, 1);
        let labels: Vec<&str> = objs.iter().map(|o| o.label()).collect();
        assert_eq!(
            labels,
            ["text-0", "text-1", "dna-0", "dna-1", "binary-0", "binary-1", "table-0", "table-1"]
        );
        assert!(objs.iter().all(|o| o.len() == 256));
    }

    #[test]
    fn blobs_shape() {
        let b = gaussian_blobs(10, 6, 4.0, 1);
        assert_eq!(b.len(), 20);
        assert!(b.iter().all(|(_, v)| v.len() == 6));
    }
}
