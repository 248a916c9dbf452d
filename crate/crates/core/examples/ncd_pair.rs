//! NCD between pairs of related and unrelated synthetic objects under every backend.

use simdist::compress::Backend;
use simdist::ncd::{ncd, DataObject};
use simdist::synth::{markov_text, random_bytes};

fn main() -> simdist::Result<()> {
    let text = DataObject::new("text", markov_text(8192, 11));
    let mut edited = text.bytes().to_vec();
    for b in edited.iter_mut().step_by(97) {
        *b = b'#';
    }
    let edited = DataObject::new("edited", edited);
    let other = DataObject::new("other-text", markov_text(8192, 12));
    let noise = DataObject::new("noise", random_bytes(8192, 13));

    let mut backends = vec![Backend::deflate(), Backend::block_sorting()];
    if let Ok(b) = Backend::from_name("ppm", None) {
        backends.push(b);
    }
    for backend in &backends {
        println!("{}", backend.family().name());
        for (a, b) in [(&text, &text), (&text, &edited), (&text, &other), (&text, &noise)] {
            println!("  ncd({:>6}, {:>10}) = {:.3}", a.label(), b.label(), ncd(backend, a, b)?);
        }
    }
    Ok(())
}
