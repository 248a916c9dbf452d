use std::collections::{BTreeSet, VecDeque};

use rand::Rng;

use crate::error::{Error, Result};

/// Unrooted tree whose internal nodes all have degree 3.
///
/// Nodes `0..n` are the leaves (leaf `i` is row `i` of the distance matrix);
/// nodes `n..2n-2` are internal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TernaryTree {
    leaves: usize,
    adj: Vec<Vec<usize>>,
}

/// Leaf set on the side of an edge that does not contain leaf 0, as a bitset.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Split(Vec<u64>);

impl Split {
    fn from_flags(flags: &[bool]) -> Self {
        let mut bits = vec![0u64; flags.len().div_ceil(64)];
        for (i, &f) in flags.iter().enumerate() {
            if f {
                bits[i / 64] |= 1 << (i % 64);
            }
        }
        Split(bits)
    }

    pub fn contains(&self, leaf: usize) -> bool {
        self.0
            .get(leaf / 64)
            .is_some_and(|w| w & (1 << (leaf % 64)) != 0)
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.0.len() * 64).filter(|&i| self.contains(i)).collect()
    }
}

impl TernaryTree {
    /// Three leaves around one internal node; the smallest ternary tree.
    fn star3(leaves: usize) -> Self {
        let mut adj = vec![Vec::with_capacity(3); 2 * leaves - 2];
        let hub = leaves;
        for leaf in 0..3 {
            adj[leaf].push(hub);
            adj[hub].push(leaf);
        }
        TernaryTree { leaves, adj }
    }

    pub fn from_edges(leaves: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if leaves < 3 {
            return Err(Error::Argument(format!(
                "a ternary tree needs at least 3 leaves, got {leaves}"
            )));
        }
        let nodes = 2 * leaves - 2;
        let mut adj = vec![Vec::new(); nodes];
        for &(u, v) in edges {
            if u >= nodes || v >= nodes || u == v {
                return Err(Error::Argument(format!("bad edge ({u}, {v})")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let tree = TernaryTree { leaves, adj };
        tree.validate()?;
        Ok(tree)
    }

    /// Uniformly random topology by stepwise insertion of leaves on random edges.
    pub fn random<R: Rng + ?Sized>(leaves: usize, rng: &mut R) -> Result<Self> {
        if leaves < 3 {
            return Err(Error::Argument(format!(
                "a ternary tree needs at least 3 leaves, got {leaves}"
            )));
        }
        let mut tree = Self::star3(leaves);
        for leaf in 3..leaves {
            let edges = tree.edges();
            let (u, w) = edges[rng.random_range(0..edges.len())];
            tree.insert_leaf(leaf, u, w);
        }
        Ok(tree)
    }

    /// Every topology on `leaves` leaves, in stepwise-insertion order.
    pub(crate) fn enumerate(leaves: usize) -> Vec<TernaryTree> {
        let mut out = Vec::new();
        fn rec(tree: &mut TernaryTree, next: usize, out: &mut Vec<TernaryTree>) {
            if next == tree.leaves {
                out.push(tree.clone());
                return;
            }
            for (u, w) in tree.edges() {
                let saved = tree.clone();
                tree.insert_leaf(next, u, w);
                rec(tree, next + 1, out);
                *tree = saved;
            }
        }
        let mut t = Self::star3(leaves);
        rec(&mut t, 3, &mut out);
        out
    }

    /// Subdivides edge `(u, w)` with the next internal node and hangs `leaf` on it.
    fn insert_leaf(&mut self, leaf: usize, u: usize, w: usize) {
        let mid = self.leaves + leaf - 2;
        self.replace_neighbor(u, w, mid);
        self.replace_neighbor(w, u, mid);
        self.adj[mid] = vec![u, w, leaf];
        self.adj[leaf] = vec![mid];
    }

    pub(crate) fn replace_neighbor(&mut self, node: usize, old: usize, new: usize) {
        let slot = self.adj[node]
            .iter()
            .position(|&x| x == old)
            .expect("edge present");
        self.adj[node][slot] = new;
    }

    pub(crate) fn adj_mut(&mut self) -> &mut Vec<Vec<usize>> {
        &mut self.adj
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        v < self.leaves
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect();
        e.sort_unstable();
        e
    }

    /// Checks degrees, node count, connectivity and acyclicity.
    pub fn validate(&self) -> Result<()> {
        let n = self.leaves;
        let bad = |m: String| Err(Error::Argument(format!("invalid ternary tree: {m}")));
        if n < 3 {
            return bad(format!("{n} leaves"));
        }
        if self.adj.len() != 2 * n - 2 {
            return bad(format!("{} nodes for {n} leaves", self.adj.len()));
        }
        for (v, ns) in self.adj.iter().enumerate() {
            let want = if v < n { 1 } else { 3 };
            if ns.len() != want {
                return bad(format!("node {v} has degree {}", ns.len()));
            }
            if ns.iter().any(|&u| u >= self.adj.len() || u == v || !self.adj[u].contains(&v)) {
                return bad(format!("node {v} has an inconsistent neighbor list"));
            }
            let mut sorted = ns.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != ns.len() {
                return bad(format!("node {v} has a repeated neighbor"));
            }
        }
        let edges: usize = self.adj.iter().map(Vec::len).sum::<usize>() / 2;
        if edges != self.adj.len() - 1 {
            return bad(format!("{edges} edges for {} nodes", self.adj.len()));
        }
        let reached = self.side(usize::MAX, 0).iter().filter(|&&r| r).count();
        if reached != self.adj.len() {
            return bad("disconnected".into());
        }
        Ok(())
    }

    /// Nodes reachable from `toward` without stepping onto `from`.
    pub fn side(&self, from: usize, toward: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[toward] = true;
        let mut stack = vec![toward];
        while let Some(v) = stack.pop() {
            for &u in &self.adj[v] {
                if u != from && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    /// BFS from `root`, never entering `blocked`. Returns parent pointers
    /// (`usize::MAX` for unreached nodes and the root).
    pub(crate) fn bfs_parents(&self, root: usize, blocked: usize) -> Vec<usize> {
        let mut parent = vec![usize::MAX; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        seen[root] = true;
        if blocked < seen.len() {
            seen[blocked] = true;
        }
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &u in &self.adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    parent[u] = v;
                    queue.push_back(u);
                }
            }
        }
        parent
    }

    /// Vertex sequence of the unique path from `a` to `b`.
    pub fn path(&self, a: usize, b: usize) -> Vec<usize> {
        let parent = self.bfs_parents(a, usize::MAX);
        let mut p = vec![b];
        let mut v = b;
        while v != a {
            v = parent[v];
            p.push(v);
        }
        p.reverse();
        p
    }

    /// Edge-count distances between all leaf pairs, row-major `n × n`.
    pub fn leaf_distances(&self) -> Vec<u32> {
        let n = self.leaves;
        let mut out = vec![0u32; n * n];
        let mut dist = vec![u32::MAX; self.adj.len()];
        let mut queue = VecDeque::new();
        for a in 0..n {
            dist.iter_mut().for_each(|d| *d = u32::MAX);
            dist[a] = 0;
            queue.clear();
            queue.push_back(a);
            while let Some(v) = queue.pop_front() {
                for &u in &self.adj[v] {
                    if dist[u] == u32::MAX {
                        dist[u] = dist[v] + 1;
                        queue.push_back(u);
                    }
                }
            }
            out[a * n..(a + 1) * n].copy_from_slice(&dist[..n]);
        }
        out
    }

    /// Leaf bipartitions induced by the internal edges; equal sets mean
    /// equal unrooted topologies.
    pub fn splits(&self) -> BTreeSet<Split> {
        let n = self.leaves;
        let mut out = BTreeSet::new();
        for (u, v) in self.edges() {
            if self.is_leaf(u) || self.is_leaf(v) {
                continue;
            }
            let side = self.side(u, v);
            let mut flags: Vec<bool> = side[..n].to_vec();
            if flags[0] {
                flags.iter_mut().for_each(|f| *f = !*f);
            }
            out.insert(Split::from_flags(&flags));
        }
        out
    }

    pub fn same_topology(&self, other: &TernaryTree) -> bool {
        self.leaves == other.leaves && self.splits() == other.splits()
    }

    /// Whether `leaves` is exactly one side of some edge (a contiguous subtree).
    pub fn is_clade(&self, leaves: &[usize]) -> bool {
        let n = self.leaves;
        let mut want = vec![false; n];
        for &l in leaves {
            if l >= n {
                return false;
            }
            want[l] = true;
        }
        let k = want.iter().filter(|&&w| w).count();
        if k == 0 || k == n {
            return true;
        }
        let complement: Vec<bool> = want.iter().map(|w| !w).collect();
        self.edges().into_iter().any(|(u, v)| {
            let side = &self.side(u, v)[..n];
            side == want.as_slice() || side == complement.as_slice()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::rng;

    #[test]
    fn random_trees_are_valid() {
        let mut r = rng(3);
        for n in 3..30 {
            let t = TernaryTree::random(n, &mut r).unwrap();
            t.validate().unwrap();
            assert_eq!(t.edges().len(), 2 * n - 3);
            assert_eq!(t.splits().len(), n - 3);
        }
        assert!(TernaryTree::random(2, &mut r).is_err());
    }

    #[test]
    fn enumeration_counts() {
        // (2n-5)!!
        for (n, count) in [(3, 1), (4, 3), (5, 15), (6, 105), (7, 945)] {
            let all = TernaryTree::enumerate(n);
            assert_eq!(all.len(), count);
            let distinct: BTreeSet<_> = all.iter().map(|t| t.splits()).collect();
            assert_eq!(distinct.len(), count);
        }
    }

    #[test]
    fn from_edges_validation() {
        // ((0,1),(2,3)) with internal nodes 4, 5
        let t = TernaryTree::from_edges(4, &[(0, 4), (1, 4), (4, 5), (2, 5), (3, 5)]).unwrap();
        assert!(t.is_clade(&[0, 1]));
        assert!(t.is_clade(&[2, 3]));
        assert!(!t.is_clade(&[0, 2]));
        assert_eq!(t.path(0, 3), vec![0, 4, 5, 3]);
        // degree violation
        assert!(TernaryTree::from_edges(4, &[(0, 4), (1, 4), (2, 4), (4, 5), (3, 5)]).is_err());
        // ((0,2),(1,3))
        assert!(TernaryTree::from_edges(4, &[(0, 4), (1, 5), (4, 5), (2, 4), (3, 5)]).is_ok());
        assert!(TernaryTree::from_edges(3, &[(0, 3), (1, 3)]).is_err());
    }

    #[test]
    fn leaf_distances_match_paths() {
        let mut r = rng(9);
        let t = TernaryTree::random(9, &mut r).unwrap();
        let d = t.leaf_distances();
        for a in 0..9 {
            for b in 0..9 {
                assert_eq!(d[a * 9 + b] as usize, t.path(a, b).len() - 1);
            }
        }
    }
}
