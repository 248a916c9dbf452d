use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, warn};
use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};
use regex::Regex;

use crate::error::{Error, Result};

use super::cache::{canonical_pair, CountCache};
use super::CountProvider;

/// Endpoint settings, read from a `key = value` file.
///
/// Keys: `url_template` (with `{query}` and optionally `{key}`), `count_pattern`
/// (regex whose first group captures the count), `provider_id`,
/// `universe_estimate` (`M`), `min_interval_ms`, `max_retries`, `backoff_ms`,
/// `timeout_ms`, `api_key`, `cache`. `SIMDIST_API_KEY` and `SIMDIST_CACHE`
/// override the file.
#[derive(Clone, Debug, PartialEq)]
pub struct LiveConfig {
    pub url_template: String,
    pub count_pattern: String,
    pub provider_id: String,
    pub universe_estimate: f64,
    pub min_interval: Duration,
    pub max_retries: u32,
    pub backoff: Duration,
    pub timeout: Duration,
    pub api_key: Option<String>,
    pub cache: Option<PathBuf>,
}

impl LiveConfig {
    pub fn new(url_template: &str, count_pattern: &str, universe_estimate: f64) -> Self {
        LiveConfig {
            url_template: url_template.to_string(),
            count_pattern: count_pattern.to_string(),
            provider_id: "live".into(),
            universe_estimate,
            min_interval: Duration::from_millis(1000),
            max_retries: 4,
            backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(20),
            api_key: None,
            cache: None,
        }
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut cfg = LiveConfig::new("", "", 0.0);
        let (mut have_url, mut have_pattern, mut have_m) = (false, false, false);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| Error::parse(source, i + 1, m);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
            let key = key.trim();
            let mut value = value.trim();
            if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
                value = &value[1..value.len() - 1];
            }
            let millis = |v: &str| {
                v.parse::<u64>()
                    .map(Duration::from_millis)
                    .map_err(|_| err(format!("{key}: bad milliseconds '{v}'")))
            };
            match key {
                "url_template" => {
                    cfg.url_template = value.to_string();
                    have_url = true;
                }
                "count_pattern" => {
                    cfg.count_pattern = value.to_string();
                    have_pattern = true;
                }
                "provider_id" => cfg.provider_id = value.to_string(),
                "universe_estimate" => {
                    cfg.universe_estimate = value
                        .parse()
                        .map_err(|_| err(format!("bad universe_estimate '{value}'")))?;
                    have_m = true;
                }
                "min_interval_ms" => cfg.min_interval = millis(value)?,
                "max_retries" => {
                    cfg.max_retries = value.parse().map_err(|_| err(format!("bad max_retries '{value}'")))?
                }
                "backoff_ms" => cfg.backoff = millis(value)?,
                "timeout_ms" => cfg.timeout = millis(value)?,
                "api_key" => cfg.api_key = Some(value.to_string()),
                "cache" => cfg.cache = Some(PathBuf::from(value)),
                _ => return Err(err(format!("unknown key '{key}'"))),
            }
        }
        for (have, key) in [(have_url, "url_template"), (have_pattern, "count_pattern"), (have_m, "universe_estimate")] {
            if !have {
                return Err(Error::parse(source, 0, format!("missing required key '{key}'")));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` and applies the environment overrides.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text, &path.display().to_string())?;
        if let Ok(key) = std::env::var("SIMDIST_API_KEY") {
            cfg.api_key = Some(key);
        }
        if let Ok(cache) = std::env::var("SIMDIST_CACHE") {
            cfg.cache = Some(PathBuf::from(cache));
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.url_template.contains("{query}") {
            return Err(Error::Argument("url_template must contain {query}".into()));
        }
        if !(self.universe_estimate.is_finite() && self.universe_estimate > 0.0) {
            return Err(Error::Argument("universe_estimate must be positive".into()));
        }
        let re = Regex::new(&self.count_pattern)
            .map_err(|e| Error::Argument(format!("count_pattern: {e}")))?;
        if re.captures_len() < 2 {
            return Err(Error::Argument("count_pattern needs a capture group".into()));
        }
        if self.provider_id.is_empty() || self.provider_id.contains(['\t', '\n']) {
            return Err(Error::Argument("provider_id must be a non-empty single field".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// Issues GET requests; swapped out in tests.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> Result<HttpResponse>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build();
        UreqTransport { agent: ureq::Agent::new_with_config(config) }
    }
}

impl Transport for UreqTransport {
    fn get(&self, url: &str) -> Result<HttpResponse> {
        let mut resp = self.agent.get(url).call().map_err(|e| Error::Network(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Error::Network(e.to_string()))?;
        Ok(HttpResponse { status, body })
    }
}

/// Page counts from a search endpoint, with a persistent cache, a request
/// rate limit and exponential backoff on HTTP 429.
pub struct LiveProvider<T = UreqTransport> {
    config: LiveConfig,
    pattern: Regex,
    transport: T,
    cache: CountCache,
    last_request: Mutex<Option<Instant>>,
    requests: AtomicU64,
}

impl LiveProvider<UreqTransport> {
    /// Provider over HTTP using the cache file named in the config, if any.
    pub fn from_config(config: LiveConfig) -> Result<Self> {
        let cache = match &config.cache {
            Some(p) => CountCache::open(p)?,
            None => CountCache::in_memory(),
        };
        let transport = UreqTransport::new(config.timeout);
        Self::with_transport(config, transport, cache)
    }
}

impl<T: Transport> LiveProvider<T> {
    pub fn with_transport(config: LiveConfig, transport: T, cache: CountCache) -> Result<Self> {
        config.validate()?;
        let pattern = Regex::new(&config.count_pattern)
            .map_err(|e| Error::Argument(format!("count_pattern: {e}")))?;
        Ok(LiveProvider {
            config,
            pattern,
            transport,
            cache,
            last_request: Mutex::new(None),
            requests: AtomicU64::new(0),
        })
    }

    pub fn cache(&self) -> &CountCache {
        &self.cache
    }

    /// Requests sent so far (cache hits excluded).
    pub fn requests_sent(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }

    fn url(&self, query: &str) -> Result<String> {
        let mut url = self
            .config
            .url_template
            .replace("{query}", &utf8_percent_encode(query, NON_ALPHANUMERIC).to_string());
        if url.contains("{key}") {
            let key = self.config.api_key.as_deref().ok_or_else(|| {
                Error::Argument("url_template needs {key} but no API key is set".into())
            })?;
            url = url.replace("{key}", &utf8_percent_encode(key, NON_ALPHANUMERIC).to_string());
        }
        Ok(url)
    }

    fn throttle(&self) {
        let mut last = self.last_request.lock().expect("rate limiter lock");
        if let Some(t) = *last {
            let wait = self.config.min_interval.saturating_sub(t.elapsed());
            if !wait.is_zero() {
                thread::sleep(wait);
            }
        }
        *last = Some(Instant::now());
    }

    fn parse_count(&self, body: &str) -> Result<u64> {
        let caps = self.pattern.captures(body).ok_or_else(|| {
            Error::ProviderFormat(format!("count pattern '{}' not found in response", self.config.count_pattern))
        })?;
        let digits: String = caps[1].chars().filter(char::is_ascii_digit).collect();
        digits
            .parse()
            .map_err(|_| Error::ProviderFormat(format!("no digits in captured count '{}'", &caps[1])))
    }

    fn fetch(&self, query: &str) -> Result<u64> {
        let url = self.url(query)?;
        let mut attempt = 0;
        loop {
            self.throttle();
            self.requests.fetch_add(1, Ordering::Relaxed);
            debug!("GET {query}");
            let resp = self.transport.get(&url)?;
            match resp.status {
                200..=299 => return self.parse_count(&resp.body),
                429 => {
                    attempt += 1;
                    if attempt > self.config.max_retries {
                        return Err(Error::RateLimited { attempts: attempt });
                    }
                    let wait = self.config.backoff * 2u32.saturating_pow(attempt - 1);
                    warn!("rate limited; retry {attempt} in {wait:?}");
                    thread::sleep(wait);
                }
                s => return Err(Error::Network(format!("HTTP {s} for query {query}"))),
            }
        }
    }

    fn cached_or_fetch(&self, x: &str, y: &str, query: String) -> Result<u64> {
        let id = &self.config.provider_id;
        if let Some(hit) = self.cache.get(x, y, id) {
            return Ok(hit.count);
        }
        let count = self.fetch(&query)?;
        self.cache.insert(x, y, count, id)?;
        Ok(count)
    }
}

impl<T: Transport> CountProvider for LiveProvider<T> {
    fn id(&self) -> &str {
        &self.config.provider_id
    }

    fn count(&self, term: &str) -> Result<u64> {
        self.cached_or_fetch(term, term, format!("\"{term}\""))
    }

    fn pair_count(&self, x: &str, y: &str) -> Result<u64> {
        if x == y {
            return self.count(x);
        }
        let (a, b) = canonical_pair(x, y);
        self.cached_or_fetch(a, b, format!("\"{a}\" \"{b}\""))
    }

    fn universe_size(&self) -> f64 {
        self.config.universe_estimate
    }
}
