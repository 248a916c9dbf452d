use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use log::{debug, info};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;

use super::brute::best_of;
use super::mutate::{mutate, FatTail};
use super::score::QuartetScorer;
use super::tree::{Split, TernaryTree};

/// Agreement tolerance on S(T) between parallel runs.
pub const AGREEMENT_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub seed: u64,
    /// Number of independent hill-climbers, at least 1.
    pub runs: usize,
    /// Exponent of the mutation-count power law.
    pub fat_tail_exponent: f64,
    /// Proposals per run before giving up.
    pub max_steps: u64,
    pub time_budget: Option<Duration>,
    /// Stop once all runs hold the same topology with equal S(T).
    pub agreement: bool,
    /// Proposals per run between agreement and budget checks.
    pub check_interval: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 0,
            runs: 4,
            fat_tail_exponent: 2.0,
            max_steps: 200_000,
            time_budget: None,
            agreement: true,
            check_interval: 500,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Argument("search needs at least one run".into()));
        }
        if self.max_steps == 0 || self.check_interval == 0 {
            return Err(Error::Argument("search budget must be positive".into()));
        }
        if self.time_budget.is_some_and(|d| d.is_zero()) {
            return Err(Error::Argument("time budget must be positive".into()));
        }
        Ok(())
    }
}

/// One accepted state of a hill-climber.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub step: u64,
    pub cost: f64,
    pub s_t: f64,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub tree: TernaryTree,
    pub s_t: f64,
    pub cost: f64,
    /// Accepted states of the winning run, starting at step 0.
    pub trace: Vec<TraceRow>,
    /// Proposals made by each run.
    pub steps: u64,
    pub best_run: usize,
    pub agreed: bool,
}

struct Climber {
    rng: ChaCha8Rng,
    tree: TernaryTree,
    cost: f64,
    splits: BTreeSet<Split>,
    trace: Vec<TraceRow>,
}

impl Climber {
    fn new(seed: u64, run: usize, scorer: &QuartetScorer) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(run as u64);
        let tree = TernaryTree::random(scorer.leaf_count(), &mut rng)?;
        let cost = scorer.tree_cost(&tree)?;
        let splits = tree.splits();
        let trace = vec![TraceRow { step: 0, cost, s_t: scorer.s_from_cost(cost) }];
        Ok(Climber { rng, tree, cost, splits, trace })
    }

    fn advance(&mut self, from: u64, count: u64, scorer: &QuartetScorer, tail: &FatTail) {
        let mut improved = false;
        for step in from + 1..=from + count {
            let (candidate, _) = mutate(&self.tree, &mut self.rng, tail);
            let cost = scorer.tree_cost(&candidate).expect("leaf count checked");
            if cost < self.cost {
                self.tree = candidate;
                self.cost = cost;
                self.trace.push(TraceRow { step, cost, s_t: scorer.s_from_cost(cost) });
                improved = true;
            }
        }
        if improved {
            self.splits = self.tree.splits();
        }
    }
}

/// Randomized hill-climbing over mutation sequences, minimizing total quartet cost.
pub fn search(matrix: &DistanceMatrix, config: &SearchConfig) -> Result<SearchOutcome> {
    config.validate()?;
    let n = matrix.len();
    if n < 4 {
        return Err(Error::Argument(format!(
            "tree search needs at least 4 objects, got {n}"
        )));
    }
    let scorer = QuartetScorer::new(matrix)?;
    if n == 4 {
        let (tree, cost) = best_of(&scorer, TernaryTree::enumerate(4))?;
        let s_t = scorer.s_from_cost(cost);
        return Ok(SearchOutcome {
            tree,
            s_t,
            cost,
            trace: vec![TraceRow { step: 0, cost, s_t }],
            steps: 0,
            best_run: 0,
            agreed: true,
        });
    }

    let tail = FatTail::for_leaves(n, config.fat_tail_exponent)?;
    let mut climbers = (0..config.runs)
        .map(|run| Climber::new(config.seed, run, &scorer))
        .collect::<Result<Vec<_>>>()?;
    let started = Instant::now();
    let mut steps = 0;
    let mut agreed = false;
    while steps < config.max_steps {
        let batch = config.check_interval.min(config.max_steps - steps);
        if climbers.len() == 1 {
            climbers[0].advance(steps, batch, &scorer, &tail);
        } else {
            climbers
                .par_iter_mut()
                .for_each(|c| c.advance(steps, batch, &scorer, &tail));
        }
        steps += batch;
        if config.agreement && climbers.len() > 1 && all_agree(&climbers, &scorer) {
            agreed = true;
            debug!("runs agree after {steps} steps");
            break;
        }
        if config.time_budget.is_some_and(|b| started.elapsed() >= b) {
            debug!("time budget exhausted after {steps} steps");
            break;
        }
    }

    let best_run = (0..climbers.len())
        .min_by(|&a, &b| climbers[a].cost.total_cmp(&climbers[b].cost).then(a.cmp(&b)))
        .expect("at least one run");
    let best = climbers.swap_remove(best_run);
    let s_t = scorer.s_from_cost(best.cost);
    info!("search finished: n={n} S(T)={s_t:.6} steps={steps} agreed={agreed}");
    Ok(SearchOutcome {
        tree: best.tree,
        s_t,
        cost: best.cost,
        trace: best.trace,
        steps,
        best_run,
        agreed,
    })
}

fn all_agree(climbers: &[Climber], scorer: &QuartetScorer) -> bool {
    let first = &climbers[0];
    let s0 = scorer.s_from_cost(first.cost);
    climbers[1..].iter().all(|c| {
        (scorer.s_from_cost(c.cost) - s0).abs() <= AGREEMENT_EPS && c.splits == first.splits
    })
}
