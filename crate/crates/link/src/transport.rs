//! The HTTP boundary. Everything above it is a pure function of response bodies.

use std::time::Duration;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

impl HttpResponse {
    pub fn ok(body: impl Into<String>) -> Self {
        HttpResponse { status: 200, body: body.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct TransportError(pub String);

/// One GET request with query parameters and an `Accept` header.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str, query: &[(&str, &str)], accept: &str) -> Result<HttpResponse, TransportError>;
}

/// Live HTTP(S) transport.
pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder().timeout_global(Some(timeout)).http_status_as_error(false).build();
        UreqTransport { agent: config.into() }
    }
}

impl Transport for UreqTransport {
    fn get(&self, url: &str, query: &[(&str, &str)], accept: &str) -> Result<HttpResponse, TransportError> {
        let mut req = self.agent.get(url).header("Accept", accept);
        for (k, v) in query {
            req = req.query(k, v);
        }
        let mut resp = req.call().map_err(|e| TransportError(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| TransportError(e.to_string()))?;
        Ok(HttpResponse { status, body })
    }
}

/// Refuses every request. Used when the network must not be touched.
#[derive(Debug, Clone, Copy, Default)]
pub struct OfflineTransport;

impl Transport for OfflineTransport {
    fn get(&self, url: &str, _query: &[(&str, &str)], _accept: &str) -> Result<HttpResponse, TransportError> {
        Err(TransportError(format!("offline: refused request to {url}")))
    }
}
