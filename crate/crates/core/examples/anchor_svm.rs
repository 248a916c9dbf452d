//! Learns 20 planted term categories from anchor-distance vectors over a
//! synthetic document corpus and prints the accuracy histogram.

use simdist::learn::{run_protocol, ProtocolConfig};
use simdist::ngd::CorpusIndex;
use simdist::synth::category_corpus;

fn main() -> simdist::Result<()> {
    let corpus = category_corpus(20, 40, 300, 4000, 7);
    let index = CorpusIndex::build(corpus.documents.iter())?;
    println!(
        "{} documents, {} terms, N = {}",
        index.document_count(),
        index.vocabulary().count(),
        index.normalizer()
    );

    let categories: Vec<(String, Vec<String>)> = corpus
        .categories
        .iter()
        .enumerate()
        .map(|(i, terms)| (format!("cat{i:02}"), terms.clone()))
        .collect();
    let dictionary: Vec<String> = index.vocabulary().map(String::from).collect();
    let report = run_protocol(&index, &categories, &dictionary, &ProtocolConfig { seed: 1, ..ProtocolConfig::default() })?;
    for t in &report.trials {
        println!(
            "{}  cv {:.3}  test {:.2}  gamma {}  cost {}",
            t.category, t.cv_accuracy, t.accuracy, t.gamma, t.cost
        );
    }
    println!("{report}");
    Ok(())
}
