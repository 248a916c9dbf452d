//! Command-line front end. Every command is a thin wrapper over library calls.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::compress::{check_normality, Backend, Tolerance};
use crate::error::{Error, Result};
use crate::io;
use crate::learn::{evaluate, featurize, train, Example, Grid, TrainConfig};
use crate::ncd::{distance_matrix, expand_paths, ncd, DataObject, NcdOptions, DEFAULT_EPS_MAX};
use crate::ngd::{ngd_from_counts, ngd_matrix, CorpusIndex, CountProvider, LiveConfig, LiveProvider, DEFAULT_CEILING};
use crate::quartet::{search, SearchConfig};
use crate::synth::standard_normality_samples;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "simdist", version, about = "Compression and page-count similarity distances, quartet trees and anchor classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalized compression distance between files (a matrix for more than two).
    Ncd(NcdArgs),
    /// Fits a ternary tree to a distance matrix file.
    Maketree(TreeArgs),
    /// Normalized Google distance between terms (a matrix for more than two).
    Ngd(NgdArgs),
    /// Builds a document-count index from a corpus.
    Index(IndexArgs),
    /// Trains an anchor-vector SVM and reports test accuracy.
    Classify(ClassifyArgs),
    /// Checks the normal-compressor axioms on sample files.
    CheckCompressor(CheckArgs),
}

#[derive(Args, Debug)]
struct BackendArgs {
    /// deflate, bzip-like, ppm or identity.
    #[arg(long, default_value = "bzip-like")]
    backend: String,
    #[arg(long)]
    level: Option<u32>,
}

impl BackendArgs {
    fn backend(&self) -> Result<Backend> {
        Backend::from_name(&self.backend, self.level)
    }
}

#[derive(Args, Debug)]
struct NcdArgs {
    /// Files or directories (expanded to their files in name order).
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    #[command(flatten)]
    backend: BackendArgs,
    /// Matrix output file; stdout when absent.
    #[arg(long)]
    matrix_out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_EPS_MAX)]
    eps_max: f64,
    /// Clamp matrix entries into [0, 1].
    #[arg(long)]
    clamp: bool,
}

#[derive(Args, Debug)]
struct TreeArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value_t = 4)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum proposals per run.
    #[arg(long, default_value_t = 200_000)]
    budget: u64,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_budget: Option<f64>,
    /// Run to the full budget instead of stopping when all runs agree.
    #[arg(long)]
    no_agreement: bool,
    #[arg(long, default_value_t = 2.0)]
    fat_tail: f64,
    /// Newick output file; stdout when absent.
    #[arg(long)]
    newick_out: Option<PathBuf>,
    #[arg(long)]
    dot_out: Option<PathBuf>,
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProviderArgs {
    /// Corpus directory (one document per file) or file (one document per line).
    #[arg(long, group = "provider")]
    corpus: Option<PathBuf>,
    /// Index file written by `index`.
    #[arg(long, group = "provider")]
    index: Option<PathBuf>,
    /// Live endpoint configuration file.
    #[arg(long, group = "provider")]
    live: Option<PathBuf>,
    /// Normalizer N; defaults to the provider's page count M.
    #[arg(long = "N")]
    normalizer: Option<f64>,
    /// Use the exact singleton-plus-doubleton total as N (offline providers).
    #[arg(long, conflicts_with = "normalizer")]
    exact_n: bool,
    /// Stand-in for infinite distances.
    #[arg(long, default_value_t = DEFAULT_CEILING)]
    ceiling: f64,
}

enum Provider {
    Corpus(CorpusIndex),
    Live(Box<LiveProvider>),
}

impl Provider {
    fn get(&self) -> &dyn CountProvider {
        match self {
            Provider::Corpus(c) => c,
            Provider::Live(l) => l.as_ref(),
        }
    }
}

impl ProviderArgs {
    fn open(&self) -> Result<Option<Provider>> {
        if let Some(p) = &self.corpus {
            let docs = io::read_corpus(p, io::CorpusLayout::detect(p))?;
            return Ok(Some(Provider::Corpus(CorpusIndex::from_texts(docs.iter().map(String::as_str))?)));
        }
        if let Some(p) = &self.index {
            return Ok(Some(Provider::Corpus(io::read_index(p)?)));
        }
        if let Some(p) = &self.live {
            return Ok(Some(Provider::Live(Box::new(LiveProvider::from_config(LiveConfig::from_file(p)?)?))));
        }
        Ok(None)
    }

    fn normalizer(&self, p: &dyn CountProvider) -> Result<f64> {
        if let Some(n) = self.normalizer {
            return Ok(n);
        }
        if self.exact_n {
            return p
                .exact_normalizer()
                .ok_or_else(|| Error::Argument("--exact-n needs an offline provider".into()));
        }
        Ok(p.default_normalizer())
    }
}

#[derive(Args, Debug)]
struct NgdArgs {
    /// Terms; two give a value, more give a matrix.
    #[arg(required = true, num_args = 1..)]
    terms: Vec<String>,
    #[command(flatten)]
    provider: ProviderArgs,
    /// Manual counts `<x>=<f(x)> <y>=<f(y)> pair=<f(x,y)>`; needs --N.
    #[arg(long, num_args = 3, group = "provider", value_name = "TERM=COUNT")]
    counts: Option<Vec<String>>,
    #[arg(long)]
    matrix_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IndexArgs {
    /// Corpus directory or one-document-per-line file.
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    /// `label<TAB>term` (or `label<TAB>v1<TAB>…` with --vectors).
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// One anchor term per line.
    #[arg(long)]
    anchors: Option<PathBuf>,
    /// Inputs are numeric feature vectors; no provider needed.
    #[arg(long, conflicts_with = "anchors")]
    vectors: bool,
    /// Index file used as the count provider (alias of --index).
    #[arg(long = "provider", conflicts_with_all = ["corpus", "index", "live"])]
    provider_index: Option<PathBuf>,
    #[command(flatten)]
    provider: ProviderArgs,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Label treated as the positive class; defaults to the first in the training file.
    #[arg(long)]
    positive: Option<String>,
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    backend: BackendArgs,
    /// Sample files; the built-in 10-sample suite when absent.
    samples: Vec<PathBuf>,
    #[arg(long, default_value_t = 1024.0)]
    tau_bits: f64,
    #[arg(long, default_value_t = 0.05)]
    tau_fraction: f64,
}

fn write_out(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => io::write_text(p, text),
        None => out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn say(out: &mut dyn Write, text: String) -> Result<()> {
    writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
}

fn fmt_distance(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.3}")
    }
}

fn cmd_ncd(a: &NcdArgs, out: &mut dyn Write) -> Result<()> {
    let backend = a.backend.backend()?;
    let files = expand_paths(&a.paths)?;
    if files.len() < 2 {
        return Err(Error::Argument(format!("ncd needs at least 2 files, got {}", files.len())));
    }
    let objects = files.iter().map(|f| DataObject::from_file(f)).collect::<Result<Vec<_>>>()?;
    if objects.len() == 2 && a.matrix_out.is_none() {
        let v = ncd(&backend, &objects[0], &objects[1])?;
        return say(out, format!("{v:.6}"));
    }
    let report = distance_matrix(backend, &objects, NcdOptions { eps_max: a.eps_max, clamp: a.clamp })?;
    write_out(a.matrix_out.as_deref(), &io::write_matrix(&report.matrix)?, out)
}

fn cmd_maketree(a: &TreeArgs, out: &mut dyn Write) -> Result<()> {
    let m = io::read_matrix(&a.matrix)?;
    let config = SearchConfig {
        seed: a.seed,
        runs: a.runs,
        fat_tail_exponent: a.fat_tail,
        max_steps: a.budget,
        time_budget: a.time_budget.map(Duration::from_secs_f64),
        agreement: !a.no_agreement,
        ..SearchConfig::default()
    };
    let result = search(&m, &config)?;
    let newick = io::write_newick(&result.tree, m.labels(), Some(result.s_t))?;
    write_out(a.newick_out.as_deref(), &newick, out)?;
    if let Some(p) = &a.dot_out {
        io::write_text(p, &io::write_dot(&result.tree, m.labels(), Some(result.s_t))?)?;
    }
    if let Some(p) = &a.trace_out {
        io::write_text(p, &io::write_trace(&result.trace))?;
    }
    say(out, format!("S(T)={:.3}", result.s_t))
}

fn parse_counts(raw: &[String], x: &str, y: &str) -> Result<(f64, f64, f64)> {
    let mut fx = None;
    let mut fy = None;
    let mut fxy = None;
    for item in raw {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Argument(format!("expected TERM=COUNT, got '{item}'")))?;
        let v: f64 = v
            .parse()
            .ok()
            .filter(|c: &f64| c.is_finite() && *c >= 0.0)
            .ok_or_else(|| Error::Argument(format!("bad count '{v}'")))?;
        let slot = if k == "pair" {
            &mut fxy
        } else if k == x && fx.is_none() {
            &mut fx
        } else if k == y {
            &mut fy
        } else {
            return Err(Error::Argument(format!("count for '{k}' matches neither term nor 'pair'")));
        };
        *slot = Some(v);
    }
    match (fx, fy, fxy) {
        (Some(a), Some(b), Some(c)) => Ok((a, b, c)),
        _ => Err(Error::Argument(format!("--counts needs {x}=…, {y}=… and pair=…"))),
    }
}

fn cmd_ngd(a: &NgdArgs, out: &mut dyn Write) -> Result<()> {
    if let Some(raw) = &a.counts {
        let [x, y] = &a.terms[..] else {
            return Err(Error::Argument("--counts takes exactly two terms".into()));
        };
        let n = a
            .provider
            .normalizer
            .ok_or_else(|| Error::Argument("--counts needs --N".into()))?;
        let (fx, fy, fxy) = parse_counts(raw, x, y)?;
        let v = if x == y { 0.0 } else { ngd_from_counts(fx, fy, fxy, n)? };
        return say(out, fmt_distance(v));
    }
    let provider = a
        .provider
        .open()?
        .ok_or_else(|| Error::Argument("ngd needs one of --corpus, --index, --live or --counts".into()))?;
    let p = provider.get();
    let n = a.provider.normalizer(p)?;
    if a.terms.len() < 2 {
        return Err(Error::Argument("ngd needs at least two terms".into()));
    }
    if a.terms.len() == 2 && a.matrix_out.is_none() {
        let v = crate::ngd::ngd(p, &a.terms[0], &a.terms[1], n)?;
        return say(out, fmt_distance(v));
    }
    let report = ngd_matrix(p, &a.terms, n, a.provider.ceiling)?;
    for &(i, j) in &report.ceiling_entries {
        log::warn!("'{}' and '{}' never co-occur; using {}", a.terms[i], a.terms[j], a.provider.ceiling);
    }
    write_out(a.matrix_out.as_deref(), &io::write_matrix(&report.matrix)?, out)
}

fn cmd_index(a: &IndexArgs, out: &mut dyn Write) -> Result<()> {
    let docs = io::read_corpus(&a.corpus, io::CorpusLayout::detect(&a.corpus))?;
    let index = CorpusIndex::from_texts(docs.iter().map(String::as_str))?;
    io::write_text(&a.out, &io::write_index(&index))?;
    say(
        out,
        format!(
            "M={} N={} terms={}",
            index.document_count(),
            index.normalizer(),
            index.vocabulary().count()
        ),
    )
}

fn cmd_classify(a: &ClassifyArgs, out: &mut dyn Write) -> Result<()> {
    let (train_set, test_set) = if a.vectors {
        (io::read_labeled_vectors(&a.train)?, io::read_labeled_vectors(&a.test)?)
    } else {
        let anchors_path = a
            .anchors
            .as_ref()
            .ok_or_else(|| Error::Argument("classify needs --anchors or --vectors".into()))?;
        let anchors = io::read_anchors(anchors_path)?;
        let provider = match &a.provider_index {
            Some(p) => Provider::Corpus(io::read_index(p)?),
            None => a
                .provider
                .open()?
                .ok_or_else(|| Error::Argument("classify needs a provider (--provider, --corpus, --index or --live)".into()))?,
        };
        let p = provider.get();
        let n = a.provider.normalizer(p)?;
        let anchors = crate::learn::AnchorSet::checked(anchors.terms().to_vec(), p)?;
        let load = |path: &Path| -> Result<Vec<Example>> {
            io::read_labeled_terms(path)?
                .into_iter()
                .map(|(label, term)| Ok(Example::new(label, featurize(p, &anchors, &term, n, a.provider.ceiling)?.values)))
                .collect()
        };
        (load(&a.train)?, load(&a.test)?)
    };
    let config = TrainConfig {
        folds: a.folds,
        grid: Grid::default(),
        seed: a.seed,
        positive_label: a.positive.clone(),
    };
    let (model, cv) = train(&train_set, &config)?;
    if let Some(p) = &a.model_out {
        io::write_text(p, &io::write_model(&model)?)?;
    }
    let accuracy = evaluate(&model, &test_set)?;
    say(out, format!("gamma={} cost={} cv_accuracy={:.3}", cv.gamma, cv.cost, cv.accuracy))?;
    say(out, format!("accuracy {accuracy:.3}"))
}

fn cmd_check(a: &CheckArgs, out: &mut dyn Write) -> Result<()> {
    let backend = a.backend.backend()?;
    let samples = if a.samples.is_empty() {
        standard_normality_samples()
    } else {
        expand_paths(&a.samples)?
            .iter()
            .map(|f| std::fs::read(f).map_err(|e| Error::io(f, e)))
            .collect::<Result<Vec<_>>>()?
    };
    let tau = Tolerance::Linear { constant_bits: a.tau_bits, fraction: a.tau_fraction };
    let report = check_normality(&backend, &samples, &tau)?;
    write_out(None, &report.to_string(), out)
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code: 0 success, 2 input error, 3 computation error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Ncd(a) => cmd_ncd(a, out),
        Command::Maketree(a) => cmd_maketree(a, out),
        Command::Ngd(a) => cmd_ngd(a, out),
        Command::Index(a) => cmd_index(a, out),
        Command::Classify(a) => cmd_classify(a, out),
        Command::CheckCompressor(a) => cmd_check(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_COMPUTE
            }
        }
    }
}
