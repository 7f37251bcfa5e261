//! Client for a Spotlight-compatible annotation service, with an on-disk
//! cache. Any service failure degrades to "no mentions" so retrieval can
//! continue on words alone.

use std::fs;
use std::path::PathBuf;
use std::sync::RwLock;
use std::time::Duration;

use log::warn;
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use super::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub surface: String,
    pub uri: String,
    /// Character offset into the annotated text.
    pub offset: usize,
}

/// Which part of a mention becomes query terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConceptSource {
    /// Final path segment of the entity URI, underscores split.
    #[default]
    Uri,
    SurfaceForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkerConfig {
    /// Base URL; requests go to `{base_url}/rest/annotate`.
    pub base_url: String,
    pub confidence: f64,
    pub timeout_ms: u64,
    pub cache_dir: Option<PathBuf>,
    pub concept_source: ConceptSource,
}

impl Default for LinkerConfig {
    fn default() -> Self {
        LinkerConfig {
            base_url: "https://api.dbpedia-spotlight.org/en".to_string(),
            confidence: 0.5,
            timeout_ms: 10_000,
            cache_dir: None,
            concept_source: ConceptSource::Uri,
        }
    }
}

#[derive(Deserialize)]
struct AnnotateResponse {
    #[serde(rename = "Resources", default)]
    resources: Vec<Resource>,
}

#[derive(Deserialize)]
struct Resource {
    #[serde(rename = "@URI")]
    uri: String,
    #[serde(rename = "@surfaceForm")]
    surface: String,
    #[serde(rename = "@offset", deserialize_with = "lenient_usize")]
    offset: usize,
}

// Spotlight renders every attribute as a string.
fn lenient_usize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(usize),
        Str(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(n) => Ok(n),
        Raw::Str(s) => s.trim().parse().map_err(serde::de::Error::custom),
    }
}

pub struct EntityLinker {
    config: LinkerConfig,
    agent: ureq::Agent,
    cache_lock: RwLock<()>,
}

impl EntityLinker {
    pub fn new(config: LinkerConfig) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build();
        EntityLinker {
            config,
            agent,
            cache_lock: RwLock::new(()),
        }
    }

    pub fn config(&self) -> &LinkerConfig {
        &self.config
    }

    fn cache_path(&self, text: &str) -> Option<PathBuf> {
        let dir = self.config.cache_dir.as_ref()?;
        let digest = hex::encode(Sha256::digest(text.as_bytes()));
        Some(dir.join(format!("{digest}-{}.json", self.config.confidence)))
    }

    fn read_cache(&self, text: &str) -> Option<Vec<EntityMention>> {
        let path = self.cache_path(text)?;
        let _guard = self.cache_lock.read().unwrap_or_else(|e| e.into_inner());
        let bytes = fs::read(path).ok()?;
        serde_json::from_slice(&bytes).ok()
    }

    fn write_cache(&self, text: &str, mentions: &[EntityMention]) {
        let Some(path) = self.cache_path(text) else {
            return;
        };
        let _guard = self.cache_lock.write().unwrap_or_else(|e| e.into_inner());
        let result = (|| -> std::io::Result<()> {
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir)?;
            }
            let tmp = path.with_extension("tmp");
            fs::write(&tmp, serde_json::to_vec(mentions)?)?;
            fs::rename(tmp, &path)
        })();
        if let Err(e) = result {
            warn!("could not write entity cache {path:?}: {e}");
        }
    }

    fn annotate(&self, text: &str) -> Result<Vec<EntityMention>, String> {
        let url = format!(
            "{}/rest/annotate",
            self.config.base_url.trim_end_matches('/')
        );
        let response = self
            .agent
            .get(&url)
            .set("Accept", "application/json")
            .query("text", text)
            .query("confidence", &self.config.confidence.to_string())
            .call()
            .map_err(|e| e.to_string())?;
        let body: AnnotateResponse = response.into_json().map_err(|e| e.to_string())?;
        Ok(body
            .resources
            .into_iter()
            .filter(|r| !r.uri.is_empty())
            .map(|r| EntityMention {
                surface: r.surface,
                uri: r.uri,
                offset: r.offset,
            })
            .collect())
    }

    /// Mentions for `text`, served from cache when present. Unreachable or
    /// malformed service responses yield an empty list and a warning.
    pub fn link(&self, text: &str) -> Vec<EntityMention> {
        if let Some(hit) = self.read_cache(text) {
            return hit;
        }
        match self.annotate(text) {
            Ok(mentions) => {
                self.write_cache(text, &mentions);
                mentions
            }
            Err(e) => {
                warn!("entity linking unavailable, falling back to words only: {e}");
                Vec::new()
            }
        }
    }

    pub fn concept_terms(&self, mentions: &[EntityMention]) -> Vec<String> {
        concept_terms(mentions, self.config.concept_source)
    }
}

/// Query terms contributed by linked entities.
pub fn concept_terms(mentions: &[EntityMention], source: ConceptSource) -> Vec<String> {
    mentions
        .iter()
        .flat_map(|m| match source {
            ConceptSource::Uri => {
                let segment = m.uri.trim_end_matches('/').rsplit('/').next().unwrap_or("");
                tokenize(&segment.replace('_', " "))
            }
            ConceptSource::SurfaceForm => tokenize(&m.surface),
        })
        .collect()
}
