//! Fusion-in-decoder input/output protocol.
//!
//! Every retrieved passage becomes one context of the form
//! `lab-exp: claim: {claim} context: {passage}`; the generator answers with
//! `LABEL; explanation`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::corpus::PassageSource;
use crate::dataset::VeracityLabel;
use crate::error::{Error, Result};
use crate::retrieval::{Query, Retriever};
use crate::service::{ServiceClient, ServiceConfig};

pub const TASK_PREFIX: &str = "lab-exp:";
pub const CLAIM_MARKER: &str = "claim:";
pub const CONTEXT_MARKER: &str = "context:";

/// Whitespace tokens contributed by the three markers.
pub const TEMPLATE_TOKENS: usize = 3;

/// Context budget in whitespace tokens (claim + passage + markers).
pub const DEFAULT_MAX_TOKENS: usize = 200;

pub const DEFAULT_MAX_NEW_TOKENS: u32 = 150;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FidInput {
    pub claim_id: String,
    pub contexts: Vec<String>,
    /// Untruncated passage texts behind `contexts`, in rank order.
    #[serde(skip)]
    pub passages: Vec<String>,
}

impl FidInput {
    pub fn k(&self) -> usize {
        self.contexts.len()
    }

    /// A single context with no passage, for generators run without retrieval.
    pub fn claim_only(claim_id: &str, claim_text: &str, max_tokens: usize) -> Result<Self> {
        let claim = crate::corpus::normalize_text(claim_text);
        let claim_tokens = claim.split_whitespace().count();
        if claim_tokens + 2 > max_tokens {
            return Err(Error::ClaimExceedsBudget {
                claim_tokens,
                budget: max_tokens,
            });
        }
        Ok(FidInput {
            claim_id: claim_id.to_string(),
            contexts: vec![format!("{TASK_PREFIX} {CLAIM_MARKER} {claim}")],
            passages: Vec::new(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FidOutput {
    /// `None` when no label could be parsed (UNPARSEABLE).
    pub label: Option<VeracityLabel>,
    pub explanation: String,
    pub raw: String,
}

/// Builds one context per passage, truncating the passage from the right so
/// each context holds at most `max_tokens` whitespace tokens.
pub fn assemble<S: AsRef<str>>(
    claim_id: &str,
    claim_text: &str,
    passages: &[S],
    max_tokens: usize,
) -> Result<FidInput> {
    if passages.is_empty() {
        return Err(Error::invalid("assemble needs at least one passage"));
    }
    let claim = crate::corpus::normalize_text(claim_text);
    let claim_tokens = claim.split_whitespace().count();
    let budget = max_tokens
        .checked_sub(claim_tokens + TEMPLATE_TOKENS)
        .ok_or(Error::ClaimExceedsBudget {
            claim_tokens,
            budget: max_tokens,
        })?;
    let contexts = passages
        .iter()
        .map(|p| {
            let words: Vec<&str> = p.as_ref().split_whitespace().take(budget).collect();
            format!(
                "{TASK_PREFIX} {CLAIM_MARKER} {claim} {CONTEXT_MARKER} {}",
                words.join(" ")
            )
        })
        .collect();
    Ok(FidInput {
        claim_id: claim_id.to_string(),
        contexts,
        passages: passages.iter().map(|p| p.as_ref().to_string()).collect(),
    })
}

/// Splits at the first `;`. Without a semicolon or a recognizable label the
/// whole text becomes the explanation and the label is `None`.
pub fn parse_output(raw: &str) -> FidOutput {
    if let Some((head, tail)) = raw.split_once(';') {
        if let Ok(label) = head.parse::<VeracityLabel>() {
            return FidOutput {
                label: Some(label),
                explanation: tail.trim().to_string(),
                raw: raw.to_string(),
            };
        }
    }
    FidOutput {
        label: None,
        explanation: raw.to_string(),
        raw: raw.to_string(),
    }
}

pub fn format_output(label: VeracityLabel, explanation: &str) -> String {
    format!("{label}; {explanation}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorBackend {
    /// Rank-1 passage as the explanation, no label.
    Top1,
    /// Returns the first context verbatim.
    Echo,
    Remote(ServiceConfig),
}

impl GeneratorBackend {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorBackend::Top1 => "top1",
            GeneratorBackend::Echo => "echo",
            GeneratorBackend::Remote(_) => "remote",
        }
    }

    /// Whether outputs carry a veracity prediction worth scoring.
    pub fn predicts_labels(&self) -> bool {
        !matches!(self, GeneratorBackend::Top1)
    }
}

/// A backend ready to serve requests.
pub struct Generator {
    backend: GeneratorBackend,
    client: Option<ServiceClient>,
}

impl Generator {
    pub fn new(backend: GeneratorBackend) -> Self {
        let client = match &backend {
            GeneratorBackend::Remote(cfg) => Some(ServiceClient::new(cfg.clone())),
            _ => None,
        };
        Generator { backend, client }
    }

    pub fn backend(&self) -> &GeneratorBackend {
        &self.backend
    }

    pub fn client(&self) -> Option<&ServiceClient> {
        self.client.as_ref()
    }

    pub fn generate(&self, input: &FidInput) -> Result<FidOutput> {
        match (&self.backend, &self.client) {
            (GeneratorBackend::Echo, _) => {
                let raw = input.contexts.first().cloned().unwrap_or_default();
                Ok(parse_output(&raw))
            }
            (GeneratorBackend::Top1, _) => {
                Ok(top1_output(input.passages.first().map(String::as_str)))
            }
            (GeneratorBackend::Remote(_), Some(client)) => {
                let raw = client.generate(&input.claim_id, &input.contexts)?;
                Ok(parse_output(&raw))
            }
            (GeneratorBackend::Remote(_), None) => {
                unreachable!("remote generator without a client")
            }
        }
    }
}

fn top1_output(passage: Option<&str>) -> FidOutput {
    let explanation = match passage {
        Some(text) => text.to_string(),
        None => {
            warn!("no passage retrieved; top-1 explanation is empty");
            String::new()
        }
    };
    FidOutput {
        label: None,
        raw: explanation.clone(),
        explanation,
    }
}

/// Top-1 baseline: the best retrieved passage verbatim, no label.
pub fn top1_explanation(
    query: &Query<'_>,
    retriever: &dyn Retriever,
    passages: &dyn PassageSource,
) -> Result<FidOutput> {
    let hits = retriever.retrieve(query, 1)?;
    match hits.first() {
        Some(hit) => {
            let p = passages.passage(hit.passage_id)?;
            Ok(top1_output(Some(&p.text)))
        }
        None => Ok(top1_output(None)),
    }
}
