//! Runs the normal-compressor harness on the built-in samples, then shows
//! deflate losing idempotency on a string far longer than its window.

use simdist::compress::{check_normality, Backend, Tolerance};
use simdist::synth::{random_bytes, standard_normality_samples};

fn main() -> simdist::Result<()> {
    let tau = Tolerance::default();
    let samples = standard_normality_samples();
    for backend in [Backend::deflate(), Backend::block_sorting()] {
        println!("{}", check_normality(&backend, &samples, &tau)?);
    }

    let oversized = vec![random_bytes(2 << 20, 99)];
    let report = check_normality(&Backend::deflate(), &oversized, &tau)?;
    println!("{report}");
    Ok(())
}
