use rand::Rng;

use crate::error::{Error, Result};

use super::tree::TernaryTree;

/// Truncated power law `P(k) ∝ k^-exponent` on `1..=k_max`.
#[derive(Clone, Debug)]
pub struct FatTail {
    exponent: f64,
    cdf: Vec<f64>,
}

impl FatTail {
    pub fn new(exponent: f64, k_max: usize) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 0.0) || k_max == 0 {
            return Err(Error::Argument(format!(
                "fat tail needs exponent > 0 and k_max ≥ 1, got {exponent} and {k_max}"
            )));
        }
        let weights: Vec<f64> = (1..=k_max).map(|k| (k as f64).powf(-exponent)).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        *cdf.last_mut().expect("k_max ≥ 1") = 1.0;
        Ok(FatTail { exponent, cdf })
    }

    /// The law used by the search: truncated at `2n`.
    pub fn for_leaves(leaves: usize, exponent: f64) -> Result<Self> {
        Self::new(exponent, 2 * leaves.max(1))
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn k_max(&self) -> usize {
        self.cdf.len()
    }

    pub fn pmf(&self, k: usize) -> f64 {
        match k {
            0 => 0.0,
            1 => self.cdf[0],
            k if k <= self.cdf.len() => self.cdf[k - 1] - self.cdf[k - 2],
            _ => 0.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1) + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MutationKind {
    LeafSwap,
    SubtreeSwap,
    SubtreeTransfer,
}

fn random_oriented_edge<R: Rng + ?Sized>(tree: &TernaryTree, rng: &mut R) -> (usize, usize) {
    let edges = tree.edges();
    let (u, v) = edges[rng.random_range(0..edges.len())];
    if rng.random_bool(0.5) {
        (u, v)
    } else {
        (v, u)
    }
}

/// Exchanges the subtree hanging from `p1` at `s1` with the one hanging from `p2` at `s2`.
fn exchange(tree: &mut TernaryTree, (p1, s1): (usize, usize), (p2, s2): (usize, usize)) {
    tree.replace_neighbor(p1, s1, s2);
    tree.replace_neighbor(s1, p1, p2);
    tree.replace_neighbor(p2, s2, s1);
    tree.replace_neighbor(s2, p2, p1);
}

fn leaf_swap<R: Rng + ?Sized>(tree: &mut TernaryTree, rng: &mut R) -> bool {
    let n = tree.leaf_count();
    if n < 4 {
        return false;
    }
    loop {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let (pa, pb) = (tree.neighbors(a)[0], tree.neighbors(b)[0]);
        if pa != pb {
            exchange(tree, (pa, a), (pb, b));
            return true;
        }
    }
}

fn subtree_swap<R: Rng + ?Sized>(tree: &mut TernaryTree, rng: &mut R) -> bool {
    let (p1, s1) = random_oriented_edge(tree, rng);
    // every node reachable from p1 away from s1 roots a subtree disjoint from s1's
    let parent = tree.bfs_parents(p1, s1);
    let candidates: Vec<usize> = (0..tree.node_count())
        .filter(|&v| parent[v] != usize::MAX && parent[v] != p1)
        .collect();
    if candidates.is_empty() {
        return false;
    }
    let s2 = candidates[rng.random_range(0..candidates.len())];
    exchange(tree, (p1, s1), (parent[s2], s2));
    true
}

fn subtree_transfer<R: Rng + ?Sized>(tree: &mut TernaryTree, rng: &mut R) -> bool {
    let (p, s) = random_oriented_edge(tree, rng);
    if tree.is_leaf(p) {
        return false;
    }
    let rest: Vec<usize> = tree.neighbors(p).iter().copied().filter(|&v| v != s).collect();
    let (x, y) = (rest[0], rest[1]);
    let parent = tree.bfs_parents(p, s);
    let targets: Vec<(usize, usize)> = (0..tree.node_count())
        .filter(|&v| parent[v] != usize::MAX && parent[v] != p)
        .map(|v| (parent[v], v))
        .collect();
    if targets.is_empty() {
        return false;
    }
    let (u, w) = targets[rng.random_range(0..targets.len())];
    tree.replace_neighbor(x, p, y);
    tree.replace_neighbor(y, p, x);
    tree.replace_neighbor(u, w, p);
    tree.replace_neighbor(w, u, p);
    tree.adj_mut()[p] = vec![s, u, w];
    true
}

/// Applies one elementary mutation in place. Trees with fewer than 4 leaves
/// have a single topology and are left unchanged.
pub fn mutate_once<R: Rng + ?Sized>(tree: &mut TernaryTree, rng: &mut R) -> Option<MutationKind> {
    let n = tree.leaf_count();
    if n < 4 {
        return None;
    }
    if n == 4 {
        leaf_swap(tree, rng);
        return Some(MutationKind::LeafSwap);
    }
    loop {
        let kind = match rng.random_range(0..3) {
            0 => MutationKind::LeafSwap,
            1 => MutationKind::SubtreeSwap,
            _ => MutationKind::SubtreeTransfer,
        };
        let done = match kind {
            MutationKind::LeafSwap => leaf_swap(tree, rng),
            MutationKind::SubtreeSwap => subtree_swap(tree, rng),
            MutationKind::SubtreeTransfer => subtree_transfer(tree, rng),
        };
        if done {
            return Some(kind);
        }
    }
}

/// A copy of `tree` after a sequence of `k ~ tail` elementary mutations; returns `k`.
pub fn mutate<R: Rng + ?Sized>(tree: &TernaryTree, rng: &mut R, tail: &FatTail) -> (TernaryTree, usize) {
    let mut t = tree.clone();
    let k = tail.sample(rng);
    for _ in 0..k {
        mutate_once(&mut t, rng);
    }
    (t, k)
}
