use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;

use super::score::QuartetScorer;
use super::tree::TernaryTree;

/// Largest leaf count the exhaustive oracle accepts.
pub const BRUTE_FORCE_MAX_LEAVES: usize = 8;

/// `(2n-5)!!`, the number of unrooted ternary topologies on `n ≥ 3` leaves.
pub fn topology_count(n: usize) -> u64 {
    (3..=n).map(|k| (2 * k - 5) as u64).product()
}

/// Every unrooted ternary topology on `n` leaves.
pub fn enumerate_topologies(n: usize) -> Result<Vec<TernaryTree>> {
    if !(3..=BRUTE_FORCE_MAX_LEAVES).contains(&n) {
        return Err(Error::Argument(format!(
            "exhaustive enumeration supports 3..={BRUTE_FORCE_MAX_LEAVES} leaves, got {n}"
        )));
    }
    Ok(TernaryTree::enumerate(n))
}

pub(crate) fn best_of(scorer: &QuartetScorer, trees: Vec<TernaryTree>) -> Result<(TernaryTree, f64)> {
    let mut best: Option<(TernaryTree, f64)> = None;
    for t in trees {
        let c = scorer.tree_cost(&t)?;
        if best.as_ref().is_none_or(|(_, b)| c < *b) {
            best = Some((t, c));
        }
    }
    best.ok_or_else(|| Error::Argument("no trees to choose from".into()))
}

/// Exhaustive minimum-cost tree and its S(T), for `4 ≤ n ≤ 8`.
pub fn brute_force_best(matrix: &DistanceMatrix) -> Result<(TernaryTree, f64)> {
    let n = matrix.len();
    if !(4..=BRUTE_FORCE_MAX_LEAVES).contains(&n) {
        return Err(Error::Argument(format!(
            "brute force supports 4..={BRUTE_FORCE_MAX_LEAVES} objects, got {n}"
        )));
    }
    let scorer = QuartetScorer::new(matrix)?;
    let (tree, cost) = best_of(&scorer, enumerate_topologies(n)?)?;
    Ok((tree, scorer.s_from_cost(cost)))
}
