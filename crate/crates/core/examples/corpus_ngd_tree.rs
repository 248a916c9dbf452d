//! NGD over an offline document index, fed into the quartet tree search.

use simdist::io::write_newick;
use simdist::ngd::{ngd_matrix, CorpusIndex, CountProvider, GoogleDistribution, DEFAULT_CEILING};
use simdist::quartet::{search, SearchConfig};
use simdist::synth::category_corpus;

fn main() -> simdist::Result<()> {
    let corpus = category_corpus(4, 12, 100, 2000, 3);
    let index = CorpusIndex::build(corpus.documents.iter())?;
    let terms: Vec<String> = corpus.categories.iter().flat_map(|c| c[..3].iter().cloned()).collect();

    let dist = GoogleDistribution::new(&index, &terms)?;
    println!("N = {}, total g over the terms = {:.6}", dist.normalizer(), dist.total_mass());
    println!(
        "M = {}, exact N = {}, alpha = {}",
        index.universe_size(),
        index.normalizer(),
        index.alpha()
    );

    let report = ngd_matrix(&index, &terms, index.default_normalizer(), DEFAULT_CEILING)?;
    let outcome = search(&report.matrix, &SearchConfig { seed: 2, ..SearchConfig::default() })?;
    print!("{}", write_newick(&outcome.tree, report.matrix.labels(), Some(outcome.s_t))?);
    Ok(())
}
