//! Empirical check of the normal-compressor axioms over a sample set.
//!
//! Each axiom is turned into a violation `lhs - rhs` (clamped at 0) per
//! instance, compared against `tau(n)` where `n` is the byte length of the
//! longest string in that instance.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use super::{concat, window_warning, Compressor};
use crate::error::{Error, Result};

pub const AXIOMS: [&str; 5] = [
    "idempotency",
    "monotonicity",
    "symmetry",
    "distributivity",
    "subadditivity",
];

/// Allowed slack in bits as a function of input length in bytes.
#[derive(Clone)]
pub enum Tolerance {
    /// `constant_bits + fraction * 8n`.
    Linear { constant_bits: f64, fraction: f64 },
    Custom(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::Linear {
            constant_bits: 1024.0,
            fraction: 0.05,
        }
    }
}

impl fmt::Debug for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Linear {
                constant_bits,
                fraction,
            } => write!(f, "tau(n) = {constant_bits} + {fraction} * 8n"),
            Tolerance::Custom(_) => f.write_str("tau(n) = <custom>"),
        }
    }
}

impl Tolerance {
    pub fn bits(&self, n: usize) -> f64 {
        match self {
            Tolerance::Linear {
                constant_bits,
                fraction,
            } => constant_bits + fraction * 8.0 * n as f64,
            Tolerance::Custom(f) => f(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomResult {
    pub axiom: &'static str,
    /// Largest violation seen, in bits, clamped below at 0.
    pub worst_violation_bits: f64,
    /// Sample indices of the instance that produced the worst violation.
    pub witness: Vec<usize>,
    /// Length `n` (bytes) used for tau at the witness.
    pub witness_len: usize,
    /// Number of instances whose violation exceeded tau(n).
    pub failures: usize,
    pub instances: usize,
    pub pass: bool,
}

impl AxiomResult {
    fn new(axiom: &'static str) -> Self {
        AxiomResult {
            axiom,
            worst_violation_bits: 0.0,
            witness: Vec::new(),
            witness_len: 0,
            failures: 0,
            instances: 0,
            pass: true,
        }
    }

    fn record(&mut self, violation: f64, n: usize, tau: &Tolerance, witness: &[usize]) {
        let v = violation.max(0.0);
        if self.instances == 0 || v > self.worst_violation_bits {
            self.worst_violation_bits = v;
            self.witness = witness.to_vec();
            self.witness_len = n;
        }
        self.instances += 1;
        if v > tau.bits(n) {
            self.failures += 1;
            self.pass = false;
        }
    }

    /// Associative merge of two partial results over disjoint instance sets.
    pub fn merge(mut self, other: AxiomResult) -> AxiomResult {
        if other.instances > 0
            && (self.instances == 0 || other.worst_violation_bits > self.worst_violation_bits)
        {
            self.worst_violation_bits = other.worst_violation_bits;
            self.witness = other.witness;
            self.witness_len = other.witness_len;
        }
        self.failures += other.failures;
        self.instances += other.instances;
        self.pass &= other.pass;
        self
    }
}

#[derive(Clone, Debug)]
pub struct NormalityReport {
    pub backend: String,
    pub samples: usize,
    pub tolerance: Tolerance,
    pub axioms: Vec<AxiomResult>,
    pub warnings: Vec<String>,
}

impl NormalityReport {
    pub fn axiom(&self, name: &str) -> Option<&AxiomResult> {
        self.axioms.iter().find(|a| a.axiom == name)
    }

    pub fn all_pass(&self) -> bool {
        self.axioms.iter().all(|a| a.pass)
    }
}

impl fmt::Display for NormalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "backend {} over {} samples, {:?}",
            self.backend, self.samples, self.tolerance
        )?;
        for a in &self.axioms {
            writeln!(
                f,
                "{:<15} {}  worst {:>10.0} bits (tau {:.0} at n={}) witness {:?}  {}/{} over",
                a.axiom,
                if a.pass { "PASS" } else { "FAIL" },
                a.worst_violation_bits,
                self.tolerance.bits(a.witness_len),
                a.witness_len,
                a.witness,
                a.failures,
                a.instances,
            )?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// Evaluates idempotency, monotonicity, symmetry, distributivity and
/// subadditivity for all ordered pairs and triples (with repetition) drawn
/// from `samples`.
pub fn check_normality<C: Compressor + ?Sized>(
    backend: &C,
    samples: &[Vec<u8>],
    tau: &Tolerance,
) -> Result<NormalityReport> {
    if samples.is_empty() {
        return Err(Error::Argument("normality check needs at least one sample".into()));
    }
    let k = samples.len();
    let mut warnings: Vec<String> = samples
        .iter()
        .filter_map(|s| window_warning(backend, s.len()))
        .collect();
    warnings.dedup();

    let single: Vec<f64> = samples
        .par_iter()
        .map(|s| backend.code_length(s).map(|b| b as f64))
        .collect::<Result<_>>()?;
    let pairs: HashMap<(usize, usize), f64> = (0..k * k)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / k, ij % k);
            let bits = backend.code_length(&concat(&samples[i], &samples[j]))?;
            Ok(((i, j), bits as f64))
        })
        .collect::<Result<_>>()?;
    let empty = backend.code_length(&[])? as f64;
    let len = |i: usize| samples[i].len();
    let c = |i: usize, j: usize| pairs[&(i, j)];

    let mut idem = AxiomResult::new(AXIOMS[0]);
    idem.record(empty, 0, tau, &[]);
    let mut mono = AxiomResult::new(AXIOMS[1]);
    let mut sym = AxiomResult::new(AXIOMS[2]);
    let mut sub = AxiomResult::new(AXIOMS[4]);
    for i in 0..k {
        idem.record(c(i, i) - single[i], 2 * len(i), tau, &[i]);
        for j in 0..k {
            let n = len(i) + len(j);
            mono.record(single[i] - c(i, j), n, tau, &[i, j]);
            sym.record((c(i, j) - c(j, i)).abs(), n, tau, &[i, j]);
            sub.record(c(i, j) - single[i] - single[j], n, tau, &[i, j]);
        }
    }

    let dist = (0..k)
        .into_par_iter()
        .map(|x| {
            let mut part = AxiomResult::new(AXIOMS[3]);
            for y in 0..k {
                for (z, &cz) in single.iter().enumerate() {
                    let n = (len(x) + len(y)).max(len(x) + len(z)).max(len(y) + len(z));
                    let v = c(x, y) + cz - c(x, z) - c(y, z);
                    part.record(v, n, tau, &[x, y, z]);
                }
            }
            part
        })
        .reduce_with(AxiomResult::merge)
        .expect("at least one sample");

    Ok(NormalityReport {
        backend: backend.name().to_string(),
        samples: k,
        tolerance: tau.clone(),
        axioms: vec![idem, mono, sym, dist, sub],
        warnings,
    })
}
