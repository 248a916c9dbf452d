//! Quartet-method tree fitting: scoring, mutations, hill-climbing search and
//! an exhaustive oracle for small inputs.

mod brute;
mod mutate;
mod score;
mod search;
mod tree;

pub use brute::{brute_force_best, enumerate_topologies, topology_count, BRUTE_FORCE_MAX_LEAVES};
pub use mutate::{mutate, mutate_once, FatTail, MutationKind};
pub use score::{
    consistent_topology, st_score, topology_cost, tree_cost, Pairing, QuartetScorer,
    QuartetTopology,
};
pub use search::{search, SearchConfig, SearchOutcome, TraceRow, AGREEMENT_EPS};
pub use tree::{Split, TernaryTree};
