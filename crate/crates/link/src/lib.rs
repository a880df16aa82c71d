//! Entity annotation (DBpedia Spotlight) and relation lookup (ConceptNet).
//!
//! Every call goes either to a live endpoint through a [`Transport`] or to a
//! fixture directory holding recorded response bodies at
//! `<dir>/<service>/<sha256>.json`. Fixture mode never touches the transport.

use std::path::{Path, PathBuf};
use std::time::Duration;

use sha2::{Digest, Sha256};
use thiserror::Error;

mod conceptnet;
mod dbpedia;
mod limiter;
mod transport;

pub use conceptnet::{concept_uri, conceptnet_relations, parse_conceptnet};
pub use dbpedia::{dbpedia_annotate, parse_spotlight, Annotation};
pub use limiter::TokenBucket;
pub use transport::{HttpResponse, OfflineTransport, Transport, TransportError, UreqTransport};

pub const ENV_DBPEDIA_ENDPOINT: &str = "KGRAPH_DBPEDIA_ENDPOINT";
pub const ENV_CONCEPTNET_ENDPOINT: &str = "KGRAPH_CONCEPTNET_ENDPOINT";
pub const ENV_TIMEOUT: &str = "KGRAPH_HTTP_TIMEOUT_SECS";

pub const DEFAULT_DBPEDIA_ENDPOINT: &str = "https://api.dbpedia-spotlight.org/en/annotate";
pub const DEFAULT_CONCEPTNET_ENDPOINT: &str = "https://api.conceptnet.io/query";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("confidence {0} is outside [0, 1]")]
    InvalidConfidence(f64),
    #[error("concept must be non-empty")]
    EmptyConcept,
    #[error("network error after {attempts} attempt(s): {message}")]
    Network { attempts: usize, message: String },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("no recorded response at {}", .0.display())]
    FixtureMissing(PathBuf),
    #[error("i/o error on {}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

pub type Result<T> = std::result::Result<T, LinkError>;

/// Where a service call is answered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Live(String),
    /// Root directory holding `<service>/<sha256>.json` files.
    Fixture(PathBuf),
}

impl Endpoint {
    /// `http://` and `https://` strings are live; anything else is a fixture directory.
    pub fn parse(s: &str) -> Self {
        if s.starts_with("http://") || s.starts_with("https://") {
            Endpoint::Live(s.to_owned())
        } else {
            Endpoint::Fixture(PathBuf::from(s))
        }
    }

    pub fn dbpedia_from_env() -> Self {
        Endpoint::parse(&std::env::var(ENV_DBPEDIA_ENDPOINT).unwrap_or_else(|_| DEFAULT_DBPEDIA_ENDPOINT.into()))
    }

    pub fn conceptnet_from_env() -> Self {
        Endpoint::parse(&std::env::var(ENV_CONCEPTNET_ENDPOINT).unwrap_or_else(|_| DEFAULT_CONCEPTNET_ENDPOINT.into()))
    }
}

/// Request timeout from the environment, in whole or fractional seconds.
pub fn timeout_from_env() -> Duration {
    std::env::var(ENV_TIMEOUT)
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|s| s.is_finite() && *s > 0.0)
        .map(Duration::from_secs_f64)
        .unwrap_or(DEFAULT_TIMEOUT)
}

/// Hex SHA-256 of the request key; the fixture file stem.
pub fn fixture_hash(key: &str) -> String {
    hex::encode(Sha256::digest(key.as_bytes()))
}

pub fn fixture_path(root: &Path, service: &str, key: &str) -> PathBuf {
    root.join(service).join(format!("{}.json", fixture_hash(key)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: usize,
    /// Delay before the second attempt; doubles after each failure.
    pub backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { attempts: 3, backoff: Duration::from_millis(500) }
    }
}

/// Transport plus retry and rate-limit policy shared by both services.
pub struct Client {
    transport: Box<dyn Transport>,
    limiter: TokenBucket,
    retry: RetryPolicy,
    record: Option<PathBuf>,
}

impl Client {
    pub fn new(transport: Box<dyn Transport>) -> Self {
        Client { transport, limiter: TokenBucket::default(), retry: RetryPolicy::default(), record: None }
    }

    /// Live client with the timeout from [`ENV_TIMEOUT`].
    pub fn live() -> Self {
        Client::new(Box::new(UreqTransport::new(timeout_from_env())))
    }

    /// Client whose transport refuses every request.
    pub fn offline() -> Self {
        Client::new(Box::new(OfflineTransport))
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_limiter(mut self, limiter: TokenBucket) -> Self {
        self.limiter = limiter;
        self
    }

    /// Save every successful live response body as a fixture under `root`.
    pub fn recording_to(mut self, root: impl Into<PathBuf>) -> Self {
        self.record = Some(root.into());
        self
    }

    /// Response body for one logical request: read from the fixture, or
    /// fetched live with retries (transport errors, 429 and 5xx are retried).
    pub(crate) fn fetch(
        &self,
        endpoint: &Endpoint,
        service: &str,
        key: &str,
        query: &[(&str, &str)],
    ) -> Result<String> {
        let url = match endpoint {
            Endpoint::Fixture(root) => {
                let path = fixture_path(root, service, key);
                return match std::fs::read_to_string(&path) {
                    Ok(body) => Ok(body),
                    Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(LinkError::FixtureMissing(path)),
                    Err(source) => Err(LinkError::Io { path, source }),
                };
            }
            Endpoint::Live(url) => url,
        };
        let attempts = self.retry.attempts.max(1);
        let mut delay = self.retry.backoff;
        let mut last = String::new();
        for attempt in 1..=attempts {
            self.limiter.acquire();
            match self.transport.get(url, query, "application/json") {
                Ok(resp) if (200..300).contains(&resp.status) => {
                    if let Some(root) = &self.record {
                        self.save(root, service, key, &resp.body)?;
                    }
                    return Ok(resp.body);
                }
                Ok(resp) if resp.status == 429 || resp.status >= 500 => last = format!("HTTP {}", resp.status),
                Ok(resp) => {
                    return Err(LinkError::Network { attempts: attempt, message: format!("HTTP {}", resp.status) })
                }
                Err(e) => last = e.0,
            }
            log::warn!("{service} request failed (attempt {attempt}/{attempts}): {last}");
            if attempt < attempts {
                std::thread::sleep(delay);
                delay *= 2;
            }
        }
        Err(LinkError::Network { attempts, message: last })
    }

    fn save(&self, root: &Path, service: &str, key: &str, body: &str) -> Result<()> {
        let path = fixture_path(root, service, key);
        let io = |source| LinkError::Io { path: path.clone(), source };
        std::fs::create_dir_all(path.parent().expect("fixture path has a parent")).map_err(io)?;
        std::fs::write(&path, body).map_err(io)
    }
}
