use std::collections::HashSet;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{BackendError, GenerationBackend, GenerationRequest};
use crate::debias::VariantKey;
use crate::embedding::EmbeddingVector;
use crate::ingest::{EmbeddingRecord, RecordSource};

pub const ENV_BACKEND_URL: &str = "DEMAUDIT_BACKEND_URL";

#[derive(Debug, Serialize)]
struct WireRequest<'a> {
    prompt: &'a str,
    negative_prompt: &'a str,
    steps: u32,
    guidance: f64,
    resolution: u32,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    variant: Option<VariantKey>,
    n: usize,
}

#[derive(Debug, Deserialize)]
struct WireRecord {
    id: String,
    embedding: Vec<f32>,
}

#[derive(Debug, Deserialize)]
struct WireResponse {
    records: Vec<WireRecord>,
}

/// JSON-over-HTTP generation service: `POST {base}/generate`.
#[derive(Debug, Clone)]
pub struct RemoteBackend {
    base: String,
    agent: ureq::Agent,
}

impl RemoteBackend {
    pub fn new(base: impl Into<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build()
            .into();
        RemoteBackend {
            base: base.into().trim_end_matches('/').to_string(),
            agent,
        }
    }

    /// Reads the base URL from `DEMAUDIT_BACKEND_URL`.
    pub fn from_env() -> Result<Self, BackendError> {
        let base = std::env::var(ENV_BACKEND_URL)
            .map_err(|_| BackendError::Config(format!("{ENV_BACKEND_URL} is not set")))?;
        Ok(Self::new(base, Duration::from_secs(600)))
    }
}

impl GenerationBackend for RemoteBackend {
    fn id(&self) -> String {
        "remote".to_string()
    }

    fn generate(&self, r: &GenerationRequest<'_>) -> Result<Vec<EmbeddingRecord>, BackendError> {
        let body = WireRequest {
            prompt: &r.prompt.text,
            negative_prompt: &r.prompt.negative_text,
            steps: r.prompt.inference_steps,
            guidance: r.prompt.guidance_scale,
            resolution: r.prompt.resolution,
            seed: r.seed,
            variant: r.variant,
            n: r.n,
        };
        let url = format!("{}/generate", self.base);
        let mut resp = self.agent.post(&url).send_json(&body).map_err(|e| match e {
            ureq::Error::ConnectionFailed | ureq::Error::HostNotFound | ureq::Error::Io(_) => {
                BackendError::Unreachable(format!("{url}: {e}"))
            }
            other => BackendError::Retryable(format!("{url}: {other}")),
        })?;
        let status = resp.status().as_u16();
        if status != 200 {
            return Err(BackendError::Retryable(format!("{url}: http status {status}")));
        }
        let parsed: WireResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::Protocol(format!("undecodable response: {e}")))?;
        if parsed.records.len() != r.n {
            return Err(BackendError::Protocol(format!(
                "asked for {} records, got {}",
                r.n,
                parsed.records.len()
            )));
        }
        let mut seen = HashSet::new();
        let dim = parsed.records.first().map_or(0, |w| w.embedding.len());
        parsed
            .records
            .into_iter()
            .map(|w| {
                if !seen.insert(w.id.clone()) {
                    return Err(BackendError::Protocol(format!("duplicate record id {:?}", w.id)));
                }
                if w.embedding.len() != dim {
                    return Err(BackendError::Protocol(format!(
                        "record {:?} has dim {}, expected {dim}",
                        w.id,
                        w.embedding.len()
                    )));
                }
                let v = EmbeddingVector::new(w.embedding.into_iter().map(f64::from).collect())
                    .map_err(|e| BackendError::Protocol(format!("record {:?}: {e}", w.id)))?;
                let mut rec = EmbeddingRecord::unlabeled(w.id, v);
                rec.source = Some(RecordSource::Generated);
                rec.provenance = Some(format!("remote:{}", r.group));
                Ok(rec)
            })
            .collect()
    }
}
