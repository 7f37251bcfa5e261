//! Blocking JSON client for the model-side generator service.
//!
//! | endpoint          | request                                               | response                                   |
//! |-------------------|-------------------------------------------------------|--------------------------------------------|
//! | `POST /generate`  | `{"claim_id", "contexts": [str], "max_new_tokens"}`   | `{"raw": str}`                             |
//! | `POST /encode`    | `{"texts": [str], "kind": "query" \| "passage"}`      | `{"vectors": [[f32]]}`                     |
//! | `POST /encode_tokens` | `{"texts": [str]}`                                | `{"items": [{"tokens", "vectors"}]}`       |
//! | `POST /classify`  | `{"claim", "explanation"}`                            | `{"label": str}`                           |
//! | `POST /train`     | `{"dataset": path, "profile": str}`                   | `{"checkpoint": str}`                      |
//! | `GET /health`     |                                                       | any 2xx                                    |

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dataset::VeracityLabel;
use crate::error::{Error, Result};
use crate::metrics::TokenEmbeddings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub endpoint: String,
    pub timeout_ms: u64,
    pub max_new_tokens: u32,
    /// Upper bound on concurrent in-flight requests.
    pub max_in_flight: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            endpoint: "http://127.0.0.1:8000".to_string(),
            timeout_ms: 120_000,
            max_new_tokens: crate::fid::DEFAULT_MAX_NEW_TOKENS,
            max_in_flight: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodeKind {
    Query,
    Passage,
}

#[derive(Deserialize)]
struct GenerateResponse {
    raw: String,
}

#[derive(Deserialize)]
struct EncodeResponse {
    vectors: Vec<Vec<f32>>,
}

#[derive(Deserialize)]
struct TokenItem {
    tokens: Vec<String>,
    vectors: Vec<Vec<f32>>,
}

#[derive(Deserialize)]
struct EncodeTokensResponse {
    items: Vec<TokenItem>,
}

#[derive(Deserialize)]
struct ClassifyResponse {
    label: String,
}

#[derive(Deserialize)]
struct TrainResponse {
    checkpoint: String,
}

pub struct ServiceClient {
    config: ServiceConfig,
    agent: ureq::Agent,
}

impl ServiceClient {
    pub fn new(config: ServiceConfig) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build();
        ServiceClient { config, agent }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.config.endpoint.trim_end_matches('/'))
    }

    fn post<T: serde::de::DeserializeOwned>(
        &self,
        tag: &str,
        path: &str,
        body: serde_json::Value,
    ) -> Result<T> {
        let transport = |message: String| Error::Transport {
            claim_id: tag.to_string(),
            message,
        };
        let response = self
            .agent
            .post(&self.url(path))
            .send_json(body)
            .map_err(|e| transport(format!("POST {path}: {e}")))?;
        response
            .into_json()
            .map_err(|e| transport(format!("POST {path}: bad response body: {e}")))
    }

    pub fn generate(&self, claim_id: &str, contexts: &[String]) -> Result<String> {
        let body = json!({
            "claim_id": claim_id,
            "contexts": contexts,
            "max_new_tokens": self.config.max_new_tokens,
        });
        let r: GenerateResponse = self.post(claim_id, "/generate", body)?;
        Ok(r.raw)
    }

    pub fn encode(&self, texts: &[String], kind: EncodeKind) -> Result<Vec<Vec<f32>>> {
        let r: EncodeResponse =
            self.post("", "/encode", json!({ "texts": texts, "kind": kind }))?;
        if r.vectors.len() != texts.len() {
            return Err(Error::Transport {
                claim_id: String::new(),
                message: format!(
                    "/encode returned {} vectors for {} texts",
                    r.vectors.len(),
                    texts.len()
                ),
            });
        }
        Ok(r.vectors)
    }

    pub fn encode_tokens(&self, texts: &[String]) -> Result<Vec<TokenEmbeddings>> {
        let r: EncodeTokensResponse = self.post("", "/encode_tokens", json!({ "texts": texts }))?;
        r.items
            .into_iter()
            .map(|item| TokenEmbeddings::new(item.tokens, item.vectors))
            .collect()
    }

    pub fn classify(
        &self,
        claim_id: &str,
        claim: &str,
        explanation: &str,
    ) -> Result<VeracityLabel> {
        let r: ClassifyResponse = self.post(
            claim_id,
            "/classify",
            json!({ "claim": claim, "explanation": explanation }),
        )?;
        r.label.parse()
    }

    pub fn train(&self, dataset: &str, profile: &str) -> Result<String> {
        let r: TrainResponse = self.post(
            "",
            "/train",
            json!({ "dataset": dataset, "profile": profile }),
        )?;
        Ok(r.checkpoint)
    }

    pub fn health(&self) -> bool {
        self.agent.get(&self.url("/health")).call().is_ok()
    }
}
