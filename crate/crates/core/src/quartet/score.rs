use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;

use super::tree::TernaryTree;

/// One of the three ways to split four sorted leaves `[a, b, c, d]` into pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pairing {
    /// ab|cd
    AbCd,
    /// ac|bd
    AcBd,
    /// ad|bc
    AdBc,
}

impl Pairing {
    pub const ALL: [Pairing; 3] = [Pairing::AbCd, Pairing::AcBd, Pairing::AdBc];

    fn index(self) -> usize {
        self as usize
    }
}

/// Four leaves (ascending) together with one pairing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuartetTopology {
    pub leaves: [usize; 4],
    pub pairing: Pairing,
}

impl QuartetTopology {
    /// The topology `uv|wx`, normalized to sorted leaves.
    pub fn new(u: usize, v: usize, w: usize, x: usize) -> Result<Self> {
        let mut leaves = [u, v, w, x];
        leaves.sort_unstable();
        if leaves.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::Argument(format!(
                "quartet needs four distinct leaves, got {u} {v} {w} {x}"
            )));
        }
        let a = leaves[0];
        let partner = if a == u {
            v
        } else if a == v {
            u
        } else if a == w {
            x
        } else {
            w
        };
        let pairing = if partner == leaves[1] {
            Pairing::AbCd
        } else if partner == leaves[2] {
            Pairing::AcBd
        } else {
            Pairing::AdBc
        };
        Ok(QuartetTopology { leaves, pairing })
    }

    pub fn pairs(&self) -> ([usize; 2], [usize; 2]) {
        let [a, b, c, d] = self.leaves;
        match self.pairing {
            Pairing::AbCd => ([a, b], [c, d]),
            Pairing::AcBd => ([a, c], [b, d]),
            Pairing::AdBc => ([a, d], [b, c]),
        }
    }
}

fn check_quartet(tree: &TernaryTree, quartet: [usize; 4]) -> Result<[usize; 4]> {
    let mut q = quartet;
    q.sort_unstable();
    if q.windows(2).any(|p| p[0] == p[1]) {
        return Err(Error::Argument(format!("quartet {quartet:?} repeats a leaf")));
    }
    if let Some(&bad) = q.iter().find(|&&l| l >= tree.leaf_count()) {
        return Err(Error::Argument(format!("leaf {bad} is not in the tree")));
    }
    Ok(q)
}

/// The pairing of `quartet` whose two connecting paths are vertex-disjoint in `tree`.
pub fn consistent_topology(tree: &TernaryTree, quartet: [usize; 4]) -> Result<QuartetTopology> {
    let leaves = check_quartet(tree, quartet)?;
    let mut found = None;
    for pairing in Pairing::ALL {
        let t = QuartetTopology { leaves, pairing };
        let ([a, b], [c, d]) = t.pairs();
        let p1 = tree.path(a, b);
        let p2 = tree.path(c, d);
        if p1.iter().all(|v| !p2.contains(v)) {
            if found.is_some() {
                return Err(Error::Argument(format!(
                    "tree is not ternary: quartet {leaves:?} has two disjoint pairings"
                )));
            }
            found = Some(t);
        }
    }
    found.ok_or_else(|| {
        Error::Argument(format!(
            "tree is not ternary: quartet {leaves:?} has no disjoint pairing"
        ))
    })
}

/// `d(a,b) + d(c,d)` for the topology `ab|cd`.
pub fn topology_cost(matrix: &DistanceMatrix, t: &QuartetTopology) -> f64 {
    let ([a, b], [c, d]) = t.pairs();
    matrix.get(a, b) + matrix.get(c, d)
}

/// Precomputed per-quartet costs for fast repeated tree scoring.
#[derive(Clone, Debug)]
pub struct QuartetScorer {
    n: usize,
    costs: Vec<[f64; 3]>,
    min_total: f64,
    max_total: f64,
}

impl QuartetScorer {
    pub fn new(matrix: &DistanceMatrix) -> Result<Self> {
        let n = matrix.len();
        if n < 4 {
            return Err(Error::Argument(format!(
                "quartet scoring needs at least 4 objects, got {n}"
            )));
        }
        let mut costs = Vec::with_capacity(n * (n - 1) * (n - 2) * (n - 3) / 24);
        let (mut lo, mut hi) = (0.0, 0.0);
        for_each_quartet(n, |leaves| {
            let c = Pairing::ALL.map(|pairing| topology_cost(matrix, &QuartetTopology { leaves, pairing }));
            lo += c[0].min(c[1]).min(c[2]);
            hi += c[0].max(c[1]).max(c[2]);
            costs.push(c);
        });
        Ok(QuartetScorer { n, costs, min_total: lo, max_total: hi })
    }

    pub fn leaf_count(&self) -> usize {
        self.n
    }

    /// `m`: the sum of per-quartet minimum costs.
    pub fn min_total(&self) -> f64 {
        self.min_total
    }

    /// `M`: the sum of per-quartet maximum costs.
    pub fn max_total(&self) -> f64 {
        self.max_total
    }

    fn check(&self, tree: &TernaryTree) -> Result<()> {
        if tree.leaf_count() != self.n {
            return Err(Error::Argument(format!(
                "tree has {} leaves but the matrix has {} objects",
                tree.leaf_count(),
                self.n
            )));
        }
        Ok(())
    }

    /// Total cost of the consistent topologies, via the four-point condition
    /// on leaf path lengths.
    pub fn tree_cost(&self, tree: &TernaryTree) -> Result<f64> {
        self.check(tree)?;
        let n = self.n;
        let d = tree.leaf_distances();
        let mut total = 0.0;
        let mut q = 0;
        for_each_quartet(n, |[a, b, c, e]| {
            let s = [
                d[a * n + b] + d[c * n + e],
                d[a * n + c] + d[b * n + e],
                d[a * n + e] + d[b * n + c],
            ];
            // the consistent pairing has the strictly shortest path sum
            let k = if s[0] < s[1] && s[0] < s[2] {
                0
            } else if s[1] < s[2] {
                1
            } else {
                2
            };
            total += self.costs[q][k];
            q += 1;
        });
        Ok(total)
    }

    /// Full recompute through explicit path-disjointness; the correctness reference.
    pub fn tree_cost_reference(&self, tree: &TernaryTree) -> Result<f64> {
        self.check(tree)?;
        let mut total = 0.0;
        let mut q = 0;
        let mut err = None;
        for_each_quartet(self.n, |leaves| {
            match consistent_topology(tree, leaves) {
                Ok(t) => total += self.costs[q][t.pairing.index()],
                Err(e) => err = Some(e),
            }
            q += 1;
        });
        err.map_or(Ok(total), Err)
    }

    pub fn s_from_cost(&self, cost: f64) -> f64 {
        let span = self.max_total - self.min_total;
        if span == 0.0 {
            1.0
        } else {
            ((self.max_total - cost) / span).clamp(0.0, 1.0)
        }
    }

    pub fn st_score(&self, tree: &TernaryTree) -> Result<f64> {
        Ok(self.s_from_cost(self.tree_cost(tree)?))
    }
}

/// Calls `f` on every ascending quartet of `0..n` in lexicographic order.
pub(crate) fn for_each_quartet(n: usize, mut f: impl FnMut([usize; 4])) {
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    f([a, b, c, d]);
                }
            }
        }
    }
}

pub fn tree_cost(tree: &TernaryTree, matrix: &DistanceMatrix) -> Result<f64> {
    QuartetScorer::new(matrix)?.tree_cost(tree)
}

pub fn st_score(tree: &TernaryTree, matrix: &DistanceMatrix) -> Result<f64> {
    QuartetScorer::new(matrix)?.st_score(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{random_matrix, rng};
    use proptest::prelude::*;

    fn quad() -> TernaryTree {
        TernaryTree::from_edges(4, &[(0, 4), (1, 4), (4, 5), (2, 5), (3, 5)]).unwrap()
    }

    fn caterpillar5() -> TernaryTree {
        // 0,1 on node 5; 2 on node 6; 3,4 on node 7
        TernaryTree::from_edges(5, &[(0, 5), (1, 5), (5, 6), (2, 6), (6, 7), (3, 7), (4, 7)])
            .unwrap()
    }

    #[test]
    fn embedded_topologies() {
        let t = consistent_topology(&quad(), [3, 1, 2, 0]).unwrap();
        assert_eq!(t, QuartetTopology::new(0, 1, 2, 3).unwrap());
        let t = consistent_topology(&caterpillar5(), [0, 1, 3, 4]).unwrap();
        assert_eq!(t.pairs(), ([0, 1], [3, 4]));
        assert!(consistent_topology(&quad(), [0, 1, 2, 9]).is_err());
        assert!(consistent_topology(&quad(), [0, 1, 2, 2]).is_err());
    }

    #[test]
    fn topology_normalization() {
        let t = QuartetTopology::new(3, 0, 2, 1).unwrap();
        assert_eq!(t.pairs(), ([0, 3], [1, 2]));
        assert_eq!(t.pairing, Pairing::AdBc);
        assert_eq!(QuartetTopology::new(2, 0, 1, 3).unwrap().pairing, Pairing::AcBd);
    }

    #[test]
    fn trichotomy_on_random_trees() {
        let mut r = rng(77);
        for n in 4..=7 {
            for _ in 0..5 {
                let tree = TernaryTree::random(n, &mut r).unwrap();
                for_each_quartet(n, |q| {
                    let disjoint = Pairing::ALL
                        .iter()
                        .filter(|&&pairing| {
                            let ([a, b], [c, d]) = QuartetTopology { leaves: q, pairing }.pairs();
                            let p = tree.path(a, b);
                            tree.path(c, d).iter().all(|v| !p.contains(v))
                        })
                        .count();
                    assert_eq!(disjoint, 1);
                });
            }
        }
    }

    #[test]
    fn costs_of_simple_matrices() {
        let m = DistanceMatrix::from_fn(
            ["u", "v", "w", "x"].map(String::from).to_vec(),
            |i, j| if (i, j) == (0, 1) || (i, j) == (2, 3) { 1.0 } else { 5.0 },
        )
        .unwrap();
        let t = QuartetTopology::new(0, 1, 2, 3).unwrap();
        assert_eq!(topology_cost(&m, &t), 2.0);
        assert_eq!(tree_cost(&quad(), &m).unwrap(), 2.0);
        assert_eq!(st_score(&quad(), &m).unwrap(), 1.0);

        let flat = DistanceMatrix::from_fn(
            (0..6).map(|i| format!("o{i}")).collect(),
            |i, j| if i == j { 0.0 } else { 0.7 },
        )
        .unwrap();
        let mut r = rng(1);
        let scorer = QuartetScorer::new(&flat).unwrap();
        let first = scorer.tree_cost(&TernaryTree::random(6, &mut r).unwrap()).unwrap();
        for _ in 0..10 {
            let t = TernaryTree::random(6, &mut r).unwrap();
            assert_eq!(scorer.tree_cost(&t).unwrap(), first);
            assert_eq!(scorer.st_score(&t).unwrap(), 1.0);
        }
        for p in Pairing::ALL {
            let t = QuartetTopology { leaves: [0, 1, 2, 3], pairing: p };
            assert_eq!(topology_cost(&flat, &t), 1.4);
        }
    }

    #[test]
    fn fast_cost_matches_resummation() {
        let m = random_matrix(5, 11);
        let tree = caterpillar5();
        let mut by_hand = 0.0;
        for_each_quartet(5, |q| {
            by_hand += topology_cost(&m, &consistent_topology(&tree, q).unwrap());
        });
        let scorer = QuartetScorer::new(&m).unwrap();
        assert_eq!(scorer.tree_cost(&tree).unwrap(), by_hand);
        assert_eq!(scorer.tree_cost_reference(&tree).unwrap(), by_hand);
    }

    #[test]
    fn mismatched_sizes_rejected() {
        let m = random_matrix(6, 1);
        assert!(tree_cost(&quad(), &m).is_err());
        assert!(QuartetScorer::new(&random_matrix(3, 1)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bounds_and_fast_path(n in 4usize..10, seed in any::<u64>()) {
            let m = random_matrix(n, seed);
            let scorer = QuartetScorer::new(&m).unwrap();
            let tree = TernaryTree::random(n, &mut rng(seed ^ 1)).unwrap();
            let c = scorer.tree_cost(&tree).unwrap();
            prop_assert_eq!(c, scorer.tree_cost_reference(&tree).unwrap());
            prop_assert!(scorer.min_total() <= c && c <= scorer.max_total());
            let s = scorer.st_score(&tree).unwrap();
            prop_assert!((0.0..=1.0).contains(&s));
        }

        #[test]
        fn scale_equivariance(n in 4usize..9, seed in any::<u64>(), lambda in 0.01f64..100.0) {
            let m = random_matrix(n, seed);
            let scaled = m.scaled(lambda);
            let tree = TernaryTree::random(n, &mut rng(seed)).unwrap();
            let a = QuartetScorer::new(&m).unwrap();
            let b = QuartetScorer::new(&scaled).unwrap();
            let sa = a.st_score(&tree).unwrap();
            let sb = b.st_score(&tree).unwrap();
            prop_assert!((sa - sb).abs() < 1e-9);
            for_each_quartet(n, |q| {
                let argmin = |mat: &DistanceMatrix| {
                    let c = Pairing::ALL.map(|pairing| topology_cost(mat, &QuartetTopology { leaves: q, pairing }));
                    (0..3).min_by(|&i, &j| c[i].total_cmp(&c[j])).unwrap()
                };
                assert_eq!(argmin(&m), argmin(&scaled));
            });
        }
    }
}
