//! The live page-count provider against an in-process stand-in for a search
//! endpoint: quoted conjunctive queries, count extraction, rate limiting,
//! backoff and the persistent cache.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Duration;

use percent_encoding::percent_decode_str;
use simdist::ngd::{ngd, CountCache, CountProvider, HttpResponse, LiveConfig, LiveProvider, Transport};

/// Serves fixed counts and answers the first request with HTTP 429.
struct FakeEngine {
    counts: HashMap<&'static str, u64>,
    first: Mutex<bool>,
}

impl Transport for FakeEngine {
    fn get(&self, url: &str) -> simdist::Result<HttpResponse> {
        let mut first = self.first.lock().unwrap();
        if std::mem::take(&mut *first) {
            return Ok(HttpResponse { status: 429, body: String::new() });
        }
        let query = url.split_once("q=").map(|(_, q)| q).unwrap_or_default();
        let query = percent_decode_str(query).decode_utf8_lossy();
        let n = self.counts.get(query.as_ref()).copied().unwrap_or(0);
        Ok(HttpResponse { status: 200, body: format!("<p>About {n} results</p>") })
    }
}

fn main() -> simdist::Result<()> {
    let dir = std::env::temp_dir().join(format!("simdist-live-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| simdist::Error::io(&dir, e))?;
    let cache_path = dir.join("counts.tsv");

    let config = LiveConfig {
        min_interval: Duration::from_millis(20),
        backoff: Duration::from_millis(10),
        ..LiveConfig::new("https://search.invalid/?q={query}", r"About ([\d,]+) results", 8_058_044_651.0)
    };
    let engine = || FakeEngine {
        counts: HashMap::from([
            ("\"horse\"", 46_700_000),
            ("\"rider\"", 12_200_000),
            ("\"horse\" \"rider\"", 2_630_000),
        ]),
        first: Mutex::new(true),
    };

    let live = LiveProvider::with_transport(config.clone(), engine(), CountCache::open(&cache_path)?)?;
    let d = ngd(&live, "rider", "horse", live.default_normalizer())?;
    println!("NGD = {d:.3} after {} requests (one was rate limited)", live.requests_sent());

    let again = LiveProvider::with_transport(config, engine(), CountCache::open(&cache_path)?)?;
    let d = ngd(&again, "horse", "rider", again.default_normalizer())?;
    println!("NGD = {d:.3} from the cache after {} requests", again.requests_sent());

    std::fs::remove_dir_all(&dir).map_err(|e| simdist::Error::io(&dir, e))?;
    Ok(())
}
