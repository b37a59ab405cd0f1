//! HTTP client for a masked-LM inference service.
//!
//! Wire protocol (UTF-8 JSON bodies, probabilities as decimal strings):
//!
//! ```text
//! POST /v1/tokenize {"text": s}
//!   -> {"tokens": [s]}
//! POST /v1/predict  {"tokens": [s], "mask_index": i, "min_prob": "d"}
//!   -> {"entries": [{"token": s, "prob": "d"}], "total_mass": "d", "model_digest": s}
//! GET  /v1/health
//!   -> {"model_digest": s, ...}
//! ```

use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{LmError, MaskedLm, PredictionDistribution};
use crate::text::{Token, TokenSequence, MASK_SURFACE};

/// Allowed deviation of the reported full-distribution mass from 1.
pub const TOTAL_MASS_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Serialize)]
struct TokenizeRequest<'a> {
    text: &'a str,
}

#[derive(Debug, Deserialize)]
struct TokenizeResponse {
    tokens: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct PredictRequest {
    pub tokens: Vec<String>,
    pub mask_index: usize,
    pub min_prob: String,
}

#[derive(Debug, Deserialize)]
pub struct WireEntry {
    pub token: String,
    pub prob: String,
}

#[derive(Debug, Deserialize)]
pub struct PredictResponse {
    pub entries: Vec<WireEntry>,
    pub total_mass: String,
    pub model_digest: String,
}

#[derive(Debug, Deserialize)]
struct HealthResponse {
    model_digest: String,
}

pub struct RemoteLm {
    endpoint: String,
    agent: ureq::Agent,
    retries: usize,
    digest: Mutex<Option<String>>,
}

impl std::fmt::Debug for RemoteLm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteLm")
            .field("endpoint", &self.endpoint)
            .field("retries", &self.retries)
            .finish()
    }
}

fn parse_decimal(field: &str, s: &str) -> Result<f64, LmError> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| LmError::Protocol(format!("{field}: {s:?} is not a decimal")))
}

/// Decimal rendering of a probability for the wire (shortest round-trip form).
pub fn format_decimal(v: f64) -> String {
    format!("{v:?}")
}

impl RemoteLm {
    pub fn new(endpoint: impl Into<String>) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(60)))
            .http_status_as_error(false)
            .build();
        RemoteLm {
            endpoint: endpoint.into().trim_end_matches('/').to_owned(),
            agent: ureq::Agent::new_with_config(config),
            retries: 3,
            digest: Mutex::new(None),
        }
    }

    pub fn with_retries(mut self, retries: usize) -> Self {
        self.retries = retries.max(1);
        self
    }

    /// Pins the digest the service must report, e.g. the one the embedding
    /// party recorded.
    pub fn expect_digest(self, digest: impl Into<String>) -> Self {
        *self.digest.lock().unwrap() = Some(digest.into());
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn post_once(&self, path: &str, body: &str) -> Result<String, LmError> {
        let url = format!("{}{}", self.endpoint, path);
        let mut resp = self
            .agent
            .post(&url)
            .header("Content-Type", "application/json")
            .send(body)
            .map_err(|e| LmError::Transport(format!("POST {url}: {e}")))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| LmError::Transport(format!("POST {url}: {e}")))?;
        match status {
            200 => Ok(text),
            500..=599 => Err(LmError::Transport(format!("POST {url}: HTTP {status}: {text}"))),
            _ => Err(LmError::Protocol(format!("POST {url}: HTTP {status}: {text}"))),
        }
    }

    fn post(&self, path: &str, body: &str) -> Result<String, LmError> {
        let mut last = None;
        for _ in 0..self.retries {
            match self.post_once(path, body) {
                Err(e) if e.is_retryable() => last = Some(e),
                other => return other,
            }
        }
        Err(last.unwrap_or_else(|| LmError::Transport("no attempts made".into())))
    }

    fn check_digest(&self, reported: &str) -> Result<(), LmError> {
        let mut seen = self.digest.lock().unwrap();
        match seen.as_deref() {
            None => {
                *seen = Some(reported.to_owned());
                Ok(())
            }
            Some(d) if d == reported => Ok(()),
            Some(d) => Err(LmError::Determinism(format!(
                "model digest changed from {d} to {reported}"
            ))),
        }
    }

    fn predict_body(temporary: &TokenSequence, position: usize, min_prob: f64) -> Result<String, LmError> {
        let req = PredictRequest {
            tokens: temporary.surfaces(),
            mask_index: position,
            min_prob: format_decimal(min_prob),
        };
        serde_json::to_string(&req).map_err(|e| LmError::Protocol(e.to_string()))
    }

    /// Sends the same prediction request twice and fails unless both
    /// response bodies hash identically.
    pub fn probe(&self, temporary: &TokenSequence, position: usize) -> Result<String, LmError> {
        let body = Self::predict_body(temporary, position, 0.0)?;
        let first = hex::encode(Sha256::digest(self.post("/v1/predict", &body)?.as_bytes()));
        let second = hex::encode(Sha256::digest(self.post("/v1/predict", &body)?.as_bytes()));
        if first != second {
            return Err(LmError::Determinism(format!(
                "identical probe returned digests {first} and {second}"
            )));
        }
        Ok(first)
    }

    pub fn health(&self) -> Result<String, LmError> {
        let url = format!("{}/v1/health", self.endpoint);
        let mut resp = self
            .agent
            .get(&url)
            .call()
            .map_err(|e| LmError::Transport(format!("GET {url}: {e}")))?;
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| LmError::Transport(format!("GET {url}: {e}")))?;
        let health: HealthResponse =
            serde_json::from_str(&text).map_err(|e| LmError::Protocol(format!("health: {e}")))?;
        Ok(health.model_digest)
    }
}

/// Validates a decoded `/v1/predict` body and converts it to canonical form.
pub fn parse_predict_response(body: &str, min_prob: f64) -> Result<(PredictionDistribution, String), LmError> {
    let resp: PredictResponse =
        serde_json::from_str(body).map_err(|e| LmError::Protocol(format!("predict: {e}")))?;
    let total_mass = parse_decimal("total_mass", &resp.total_mass)?;
    if (total_mass - 1.0).abs() > TOTAL_MASS_TOLERANCE {
        return Err(LmError::Protocol(format!(
            "total_mass {total_mass} differs from 1 by more than {TOTAL_MASS_TOLERANCE}"
        )));
    }
    let mut entries = Vec::with_capacity(resp.entries.len());
    for e in resp.entries {
        let p = parse_decimal("prob", &e.prob)?;
        let token = Token::new(e.token).ok_or_else(|| LmError::Protocol("empty token".into()))?;
        if p >= min_prob {
            entries.push((token, p));
        }
    }
    Ok((PredictionDistribution::new(entries, total_mass)?, resp.model_digest))
}

impl MaskedLm for RemoteLm {
    fn tokenize(&self, text: &str) -> Result<TokenSequence, LmError> {
        let body = serde_json::to_string(&TokenizeRequest { text })
            .map_err(|e| LmError::Protocol(e.to_string()))?;
        let resp: TokenizeResponse = serde_json::from_str(&self.post("/v1/tokenize", &body)?)
            .map_err(|e| LmError::Protocol(format!("tokenize: {e}")))?;
        let tokens = resp
            .tokens
            .into_iter()
            .map(|t| Token::new(t).ok_or_else(|| LmError::Protocol("empty token".into())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TokenSequence::from_tokens(tokens))
    }

    fn predict(
        &self,
        temporary: &TokenSequence,
        position: usize,
        min_prob: f64,
    ) -> Result<PredictionDistribution, LmError> {
        match temporary.get(position) {
            Some(slot) if slot.is_mask() => {}
            _ => return Err(LmError::NotMasked { position }),
        }
        debug_assert_eq!(temporary.get(position).unwrap().surface(), MASK_SURFACE);
        let body = Self::predict_body(temporary, position, min_prob)?;
        let (dist, digest) = parse_predict_response(&self.post("/v1/predict", &body)?, min_prob)?;
        self.check_digest(&digest)?;
        Ok(dist)
    }

    fn model_digest(&self) -> Result<String, LmError> {
        if let Some(d) = self.digest.lock().unwrap().clone() {
            return Ok(d);
        }
        let d = self.health()?;
        self.check_digest(&d)?;
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn response_is_resorted_canonically() {
        let body = r#"{"entries":[{"token":"town","prob":"0.25"},{"token":"city","prob":"0.5"},{"token":"burg","prob":"0.25"}],
                      "total_mass":"1.00000","model_digest":"m1"}"#;
        let (d, digest) = parse_predict_response(body, 0.0).unwrap();
        let names: Vec<&str> = d.entries().iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(names, ["city", "burg", "town"]);
        assert_eq!(digest, "m1");
    }

    #[test]
    fn bad_total_mass_is_protocol_error() {
        let body = r#"{"entries":[],"total_mass":"0.9","model_digest":"m"}"#;
        assert!(matches!(parse_predict_response(body, 0.0), Err(LmError::Protocol(_))));
    }

    #[test]
    fn non_decimal_probability_is_protocol_error() {
        let body = r#"{"entries":[{"token":"a","prob":"lots"}],"total_mass":"1","model_digest":"m"}"#;
        assert!(matches!(parse_predict_response(body, 0.0), Err(LmError::Protocol(_))));
        assert!(matches!(parse_predict_response("not json", 0.0), Err(LmError::Protocol(_))));
    }

    #[test]
    fn decimal_format_round_trips() {
        for v in [0.02, 0.1, 1.0, 1e-12, 0.123456789012] {
            assert_eq!(format_decimal(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn unreachable_service_is_retryable_transport_error() {
        let lm = RemoteLm::new("http://127.0.0.1:9").with_retries(1);
        let err = lm.tokenize("hello").unwrap_err();
        assert!(err.is_retryable(), "{err:?}");
    }
}
