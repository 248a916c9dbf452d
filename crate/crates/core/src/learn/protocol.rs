use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ngd::{CountProvider, DEFAULT_CEILING};

use super::{evaluate, featurize, train, AnchorSet, Example, Grid, TrainConfig};

/// Parameters of the repeated category-learning experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolConfig {
    /// Training examples per class (positives and negatives each).
    pub train_per_class: usize,
    /// Test examples per class.
    pub test_per_class: usize,
    /// Anchors drawn from the category and from the dictionary, each.
    pub anchors_per_side: usize,
    pub folds: usize,
    pub grid: Grid,
    pub seed: u64,
    /// `N` for the NGD; defaults to the provider's.
    pub normalizer: Option<f64>,
    pub ceiling: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            train_per_class: 25,
            test_per_class: 10,
            anchors_per_side: 3,
            folds: 5,
            grid: Grid::default(),
            seed: 0,
            normalizer: None,
            ceiling: DEFAULT_CEILING,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub category: String,
    pub anchors: Vec<String>,
    pub gamma: f64,
    pub cost: f64,
    pub cv_accuracy: f64,
    pub accuracy: f64,
}

/// Accuracies over all trials with summary statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport {
    pub trials: Vec<TrialResult>,
}

impl TrialReport {
    pub fn accuracies(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.accuracy).collect()
    }

    pub fn mean(&self) -> f64 {
        let a = self.accuracies();
        a.iter().sum::<f64>() / a.len() as f64
    }

    /// Population variance of the accuracies.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let a = self.accuracies();
        a.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / a.len() as f64
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Counts per bin `[k·width, (k+1)·width)`, the last bin closed at 1.
    pub fn histogram(&self, width: f64) -> Vec<(f64, usize)> {
        let bins = (1.0 / width).round() as usize;
        let mut counts = vec![0; bins];
        for a in self.accuracies() {
            let k = ((a / width + 1e-9).floor() as usize).min(bins - 1);
            counts[k] += 1;
        }
        counts.into_iter().enumerate().map(|(k, c)| (k as f64 * width, c)).collect()
    }
}

impl fmt::Display for TrialReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Histogram of accuracies over {} trials", self.trials.len())?;
        let hist = self.histogram(0.05);
        let first = hist.iter().position(|&(_, c)| c > 0).unwrap_or(0);
        for &(lo, c) in &hist[first..] {
            writeln!(f, "{lo:.2}-{:.2} {:>3} {}", lo + 0.05, c, "#".repeat(c))?;
        }
        writeln!(f, "mean accuracy {:.4}", self.mean())?;
        writeln!(f, "variance {:.5}", self.variance())?;
        write!(f, "standard deviation {:.4}", self.std_dev())
    }
}

fn draw(pool: &[String], count: usize, what: &str, r: &mut ChaCha8Rng) -> Result<Vec<String>> {
    if pool.len() < count {
        return Err(Error::Argument(format!(
            "{what}: need {count} known terms, only {} available",
            pool.len()
        )));
    }
    let mut p = pool.to_vec();
    p.shuffle(r);
    p.truncate(count);
    Ok(p)
}

fn known<P: CountProvider + ?Sized>(provider: &P, terms: impl Iterator<Item = String>) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for t in terms {
        if provider.count(&t)? > 0 && !out.contains(&t) {
            out.push(t);
        }
    }
    Ok(out)
}

fn run_trial<P: CountProvider + ?Sized>(
    provider: &P,
    index: usize,
    (name, members): &(String, Vec<String>),
    dictionary: &[String],
    cfg: &ProtocolConfig,
) -> Result<TrialResult> {
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
    r.set_stream(index as u64);
    let per_side = cfg.train_per_class + cfg.test_per_class + cfg.anchors_per_side;
    let positives = known(provider, members.iter().cloned())?;
    let negatives = known(provider, dictionary.iter().filter(|t| !members.contains(t)).cloned())?;
    let pos = draw(&positives, per_side, name, &mut r)?;
    let neg = draw(&negatives, per_side, "dictionary", &mut r)?;
    let k = cfg.anchors_per_side;
    let anchor_terms: Vec<String> = pos[..k].iter().chain(&neg[..k]).cloned().collect();
    let anchors = AnchorSet::new(anchor_terms.clone())?;
    let n = cfg.normalizer.unwrap_or_else(|| provider.default_normalizer());
    let other = format!("not-{name}");
    let examples = |range: std::ops::Range<usize>| -> Result<Vec<Example>> {
        let mut v = Vec::new();
        for i in range {
            for (term, label) in [(&pos[i], name), (&neg[i], &other)] {
                let f = featurize(provider, &anchors, term, n, cfg.ceiling)?;
                v.push(Example::new(label.clone(), f.values));
            }
        }
        Ok(v)
    };
    let train_set = examples(k..k + cfg.train_per_class)?;
    let test_set = examples(k + cfg.train_per_class..per_side)?;
    let tc = TrainConfig {
        folds: cfg.folds,
        grid: cfg.grid.clone(),
        seed: cfg.seed.wrapping_add(index as u64),
        positive_label: Some(name.clone()),
    };
    let (model, cv) = train(&train_set, &tc)?;
    Ok(TrialResult {
        category: name.clone(),
        anchors: anchor_terms,
        gamma: cv.gamma,
        cost: cv.cost,
        cv_accuracy: cv.accuracy,
        accuracy: evaluate(&model, &test_set)?,
    })
}

/// One trial per category: anchors and examples are drawn from the category
/// (positives) and from the rest of `dictionary` (negatives), featurized by
/// NGD to the anchors, and classified by a cross-validated SVM.
pub fn run_protocol<P: CountProvider + ?Sized>(
    provider: &P,
    categories: &[(String, Vec<String>)],
    dictionary: &[String],
    cfg: &ProtocolConfig,
) -> Result<TrialReport> {
    if categories.is_empty() {
        return Err(Error::Argument("no categories given".into()));
    }
    if cfg.train_per_class < 2 || cfg.test_per_class == 0 || cfg.anchors_per_side == 0 {
        return Err(Error::Argument("protocol needs ≥ 2 training, ≥ 1 test and ≥ 1 anchor per side".into()));
    }
    let trials = categories
        .par_iter()
        .enumerate()
        .map(|(i, c)| run_trial(provider, i, c, dictionary, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialReport { trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(acc: &[f64]) -> TrialReport {
        TrialReport {
            trials: acc
                .iter()
                .map(|&accuracy| TrialResult {
                    category: "c".into(),
                    anchors: vec![],
                    gamma: 1.0,
                    cost: 1.0,
                    cv_accuracy: 1.0,
                    accuracy,
                })
                .collect(),
        }
    }

    #[test]
    fn statistics() {
        let r = report(&[0.75, 1.0, 0.9, 0.95]);
        assert!((r.mean() - 0.9).abs() < 1e-12);
        assert!((r.variance() - 0.00875).abs() < 1e-12);
        let h = r.histogram(0.05);
        assert_eq!(h.len(), 20);
        assert_eq!(h[15].1, 1);
        assert_eq!(h[18].1, 1);
        assert_eq!(h[19].1, 2);
        let text = r.to_string();
        assert!(text.starts_with("Histogram of accuracies over 4 trials"));
        assert!(text.contains("mean accuracy 0.9000"));
        assert!(text.contains("variance 0.00875"));
    }
}
