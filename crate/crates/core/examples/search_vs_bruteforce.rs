//! Compares the randomized quartet search with exhaustive enumeration on
//! small random matrices, and reports the random-tree baseline.

use simdist::quartet::{brute_force_best, search, topology_count, QuartetScorer, SearchConfig, TernaryTree};
use simdist::synth::{random_matrix, rng};

fn main() -> simdist::Result<()> {
    for n in 4..=7 {
        let mut equal = 0;
        for seed in 0..20 {
            let m = random_matrix(n, 1000 * n as u64 + seed);
            let (_, best) = brute_force_best(&m)?;
            let found = search(&m, &SearchConfig { seed, ..SearchConfig::default() })?;
            if found.s_t == best {
                equal += 1;
            }
        }
        println!("n={n}: {} topologies, search matched brute force on {equal}/20", topology_count(n));
    }

    let mut r = rng(5);
    let mut total = 0.0;
    let mut count = 0;
    for seed in 0..20 {
        let scorer = QuartetScorer::new(&random_matrix(10, seed))?;
        for _ in 0..10 {
            total += scorer.st_score(&TernaryTree::random(10, &mut r)?)?;
            count += 1;
        }
    }
    println!("mean S(T) of {count} random 10-leaf trees: {:.3}", total / count as f64);
    Ok(())
}
