//! Anchor-distance features and a binary RBF support vector machine with
//! cross-validated parameter selection.

mod protocol;
mod svm;

pub use protocol::{run_protocol, ProtocolConfig, TrialReport, TrialResult};
pub use svm::{rbf, KKT_TOLERANCE};

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ngd::{ngd, unknown_terms, CountProvider};
use crate::synth::rng;

/// Ordered, distinct anchor terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnchorSet {
    terms: Vec<String>,
}

impl AnchorSet {
    pub fn new(terms: Vec<String>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Argument("anchor set is empty".into()));
        }
        crate::matrix::check_unique_labels(&terms)
            .map_err(|_| Error::Argument("anchor terms must be distinct".into()))?;
        Ok(AnchorSet { terms })
    }

    /// Also checks that every anchor occurs under `provider`.
    pub fn checked<P: CountProvider + ?Sized>(terms: Vec<String>, provider: &P) -> Result<Self> {
        let set = Self::new(terms)?;
        let unknown = unknown_terms(provider, &set.terms)?;
        if !unknown.is_empty() {
            return Err(Error::UnknownTerm(unknown));
        }
        Ok(set)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// A term's NGD to each anchor, in anchor order.
#[derive(Clone, Debug, PartialEq)]
pub struct AnchorVector {
    pub term: String,
    pub values: Vec<f64>,
}

/// `values[i] = NGD(anchor_i, term)` with infinite entries replaced by `ceiling`.
pub fn featurize<P: CountProvider + ?Sized>(
    provider: &P,
    anchors: &AnchorSet,
    term: &str,
    n: f64,
    ceiling: f64,
) -> Result<AnchorVector> {
    if provider.count(term)? == 0 {
        return Err(Error::UnknownTerm(vec![term.to_string()]));
    }
    let values = anchors
        .terms()
        .iter()
        .map(|a| ngd(provider, a, term, n).map(|v| if v.is_infinite() { ceiling } else { v }))
        .collect::<Result<_>>()?;
    Ok(AnchorVector { term: term.to_string(), values })
}

/// A labeled feature vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub label: String,
    pub features: Vec<f64>,
}

impl Example {
    pub fn new(label: impl Into<String>, features: Vec<f64>) -> Self {
        Example { label: label.into(), features }
    }
}

/// Candidate `(γ, cost)` values for cross validation.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub gammas: Vec<f64>,
    pub costs: Vec<f64>,
}

impl Default for Grid {
    /// `γ ∈ {2⁻⁴, …, 2⁴}`, `cost ∈ {2⁻², …, 2⁶}`.
    fn default() -> Self {
        Grid {
            gammas: (-4..=4).map(|e| 2f64.powi(e)).collect(),
            costs: (-2..=6).map(|e| 2f64.powi(e)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub folds: usize,
    pub grid: Grid,
    /// Seed for the fold assignment.
    pub seed: u64,
    /// Label mapped to the positive side; defaults to the first label seen.
    pub positive_label: Option<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { folds: 5, grid: Grid::default(), seed: 0, positive_label: None }
    }
}

/// A trained binary RBF classifier.
#[derive(Clone, Debug, PartialEq)]
pub struct SvmModel {
    pub gamma: f64,
    pub cost: f64,
    /// `[positive, negative]`; a decision value of exactly 0 maps to positive.
    pub labels: [String; 2],
    pub bias: f64,
    pub support_vectors: Vec<Vec<f64>>,
    /// `αᵢ yᵢ` per support vector.
    pub coefficients: Vec<f64>,
}

impl SvmModel {
    pub fn dimension(&self) -> Option<usize> {
        self.support_vectors.first().map(Vec::len)
    }

    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if let Some(d) = self.dimension() {
            if d != x.len() {
                return Err(Error::Argument(format!(
                    "vector has {} entries, model expects {d}",
                    x.len()
                )));
            }
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, c)| c * rbf(self.gamma, sv, x))
            .sum::<f64>()
            + self.bias)
    }
}

/// Label of `x` under `model`.
pub fn classify<'m>(model: &'m SvmModel, x: &[f64]) -> Result<&'m str> {
    let d = model.decision_value(x)?;
    Ok(if d >= 0.0 { &model.labels[0] } else { &model.labels[1] })
}

/// Fraction of `examples` labeled correctly.
pub fn evaluate(model: &SvmModel, examples: &[Example]) -> Result<f64> {
    if examples.is_empty() {
        return Err(Error::Argument("cannot evaluate on an empty test set".into()));
    }
    let mut correct = 0;
    for e in examples {
        if classify(model, &e.features)? == e.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / examples.len() as f64)
}

fn label_pair(examples: &[Example], positive: Option<&str>) -> Result<[String; 2]> {
    let mut seen: Vec<&str> = Vec::new();
    for e in examples {
        if !seen.contains(&e.label.as_str()) {
            seen.push(&e.label);
        }
    }
    if seen.len() != 2 {
        return Err(Error::Argument(format!(
            "binary training needs exactly 2 labels, got {}",
            seen.len()
        )));
    }
    let pos = match positive {
        Some(p) if seen.contains(&p) => p,
        Some(p) => return Err(Error::Argument(format!("positive label '{p}' not in training data"))),
        None => seen[0],
    };
    let neg = if seen[0] == pos { seen[1] } else { seen[0] };
    for l in [pos, neg] {
        if examples.iter().filter(|e| e.label == l).count() < 2 {
            return Err(Error::Argument(format!("label '{l}' has fewer than 2 examples")));
        }
    }
    Ok([pos.to_string(), neg.to_string()])
}

fn check_dims(examples: &[Example]) -> Result<usize> {
    let d = examples.first().map_or(0, |e| e.features.len());
    if d == 0 || examples.iter().any(|e| e.features.len() != d) {
        return Err(Error::Argument("feature vectors must be non-empty and of equal length".into()));
    }
    if examples.iter().flat_map(|e| &e.features).any(|v| !v.is_finite()) {
        return Err(Error::Argument("feature vectors must be finite".into()));
    }
    Ok(d)
}

fn fit(examples: &[&Example], kernel: impl Fn(usize, usize) -> f64, labels: &[String; 2], gamma: f64, cost: f64) -> Result<SvmModel> {
    let y: Vec<f64> = examples.iter().map(|e| if e.label == labels[0] { 1.0 } else { -1.0 }).collect();
    let sol = svm::solve_dual(examples.len(), kernel, &y, cost)?;
    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for (i, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(examples[i].features.clone());
            coefficients.push(a * y[i]);
        }
    }
    Ok(SvmModel { gamma, cost, labels: labels.clone(), bias: sol.bias, support_vectors, coefficients })
}

/// Trains on all `examples` with fixed parameters.
pub fn train_fixed(examples: &[Example], gamma: f64, cost: f64, positive: Option<&str>) -> Result<SvmModel> {
    check_dims(examples)?;
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::Argument(format!("gamma must be positive, got {gamma}")));
    }
    let labels = label_pair(examples, positive)?;
    let refs: Vec<&Example> = examples.iter().collect();
    fit(&refs, |i, j| rbf(gamma, &refs[i].features, &refs[j].features), &labels, gamma, cost)
}

/// Fold index per example: each class is shuffled with `seed` and dealt round-robin.
pub fn stratified_folds(labels: &[&str], folds: usize, seed: u64) -> Vec<usize> {
    let mut out = vec![0; labels.len()];
    let mut classes: Vec<&str> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut r = rng(seed);
    for class in classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut r);
        for (k, i) in idx.into_iter().enumerate() {
            out[i] = k % folds;
        }
    }
    out
}

/// Mean fold accuracy for each grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct CvReport {
    pub gamma: f64,
    pub cost: f64,
    pub accuracy: f64,
    /// `(γ, cost, mean accuracy)` in grid order.
    pub table: Vec<(f64, f64, f64)>,
}

/// Picks `(γ, cost)` by k-fold cross validation (ties: smaller cost, then
/// smaller γ), then retrains on all examples.
pub fn train(examples: &[Example], config: &TrainConfig) -> Result<(SvmModel, CvReport)> {
    check_dims(examples)?;
    if config.folds < 2 {
        return Err(Error::Argument(format!("need at least 2 folds, got {}", config.folds)));
    }
    let grid = &config.grid;
    if grid.gammas.is_empty() || grid.costs.is_empty() {
        return Err(Error::Argument("parameter grid is empty".into()));
    }
    if grid.gammas.iter().chain(&grid.costs).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Argument("grid values must be positive".into()));
    }
    let labels = label_pair(examples, config.positive_label.as_deref())?;
    let names: Vec<&str> = examples.iter().map(|e| e.label.as_str()).collect();
    let fold = stratified_folds(&names, config.folds, config.seed);
    let n = examples.len();
    let sq: Vec<f64> = (0..n * n)
        .map(|k| {
            let (a, b) = (&examples[k / n].features, &examples[k % n].features);
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
        })
        .collect();

    let points: Vec<(f64, f64)> = grid
        .gammas
        .iter()
        .flat_map(|&g| grid.costs.iter().map(move |&c| (g, c)))
        .collect();
    let table = points
        .par_iter()
        .map(|&(gamma, cost)| {
            let mut accs = Vec::with_capacity(config.folds);
            for f in 0..config.folds {
                let train_idx: Vec<usize> = (0..n).filter(|&i| fold[i] != f).collect();
                let test_idx: Vec<usize> = (0..n).filter(|&i| fold[i] == f).collect();
                if test_idx.is_empty() {
                    continue;
                }
                let refs: Vec<&Example> = train_idx.iter().map(|&i| &examples[i]).collect();
                let model = fit(
                    &refs,
                    |a, b| (-gamma * sq[train_idx[a] * n + train_idx[b]]).exp(),
                    &labels,
                    gamma,
                    cost,
                )?;
                let correct = test_idx
                    .iter()
                    .filter(|&&i| classify(&model, &examples[i].features).is_ok_and(|l| l == examples[i].label))
                    .count();
                accs.push(correct as f64 / test_idx.len() as f64);
            }
            Ok((gamma, cost, accs.iter().sum::<f64>() / accs.len() as f64))
        })
        .collect::<Result<Vec<_>>>()?;

    let &(gamma, cost, accuracy) = table
        .iter()
        .min_by(|a, b| {
            b.2.total_cmp(&a.2)
                .then(a.1.total_cmp(&b.1))
                .then(a.0.total_cmp(&b.0))
        })
        .expect("grid is non-empty");
    let model = train_fixed(examples, gamma, cost, Some(&labels[0]))?;
    Ok((model, CvReport { gamma, cost, accuracy, table }))
}
