//! LLM completion client with a mandatory on-disk response cache.
//!
//! Requests are keyed by the SHA-256 of their canonical JSON encoding
//! (`model`, `prompt`, `temperature`, `max_tokens`, in that order). The raw
//! provider payload is cached verbatim as `<key>.json` in the cache
//! directory, so a warm cache replays byte-identical responses without any
//! network access.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::descriptor::CategoryDictionary;
use super::prompt::{build_prompt, parse_descriptors, FewShotExemplar};
use crate::error::{Error, Result};

pub const DEFAULT_MODEL: &str = "text-davinci-002";
pub const DEFAULT_TEMPERATURE: f64 = 0.7;
pub const DEFAULT_MAX_TOKENS: u32 = 100;

pub const ENV_ENDPOINT: &str = "DESCRY_LLM_ENDPOINT";
pub const ENV_API_KEY: &str = "DESCRY_LLM_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub model: String,
    pub prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl LlmRequest {
    /// A request with the default sampling parameters.
    pub fn new(model: impl Into<String>, prompt: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            prompt: prompt.into(),
            temperature: DEFAULT_TEMPERATURE,
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("request serializes")
    }

    pub fn cache_key(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LlmResponse {
    pub text: String,
    /// SHA-256 of the raw payload, hex encoded.
    pub payload_sha256: String,
}

impl LlmResponse {
    /// Extracts the completion text from a provider payload.
    ///
    /// Accepts the completions shape (`choices[0].text`) and flat objects
    /// carrying a `completion` or `text` string.
    pub fn from_payload(payload: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(payload).map_err(|e| Error::Provider(format!("payload is not JSON: {e}")))?;
        let text = value
            .pointer("/choices/0/text")
            .or_else(|| value.get("completion"))
            .or_else(|| value.get("text"))
            .and_then(serde_json::Value::as_str)
            .ok_or_else(|| Error::Provider("payload carries no completion text".into()))?;
        Ok(Self {
            text: text.to_owned(),
            payload_sha256: hex::encode(Sha256::digest(payload.as_bytes())),
        })
    }
}

/// Something that can turn a request into a raw response payload.
pub trait LlmProvider: Send + Sync {
    fn fetch(&self, request: &LlmRequest) -> Result<String>;

    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse> {
        LlmResponse::from_payload(&self.fetch(request)?)
    }
}

impl<P: LlmProvider + ?Sized> LlmProvider for &P {
    fn fetch(&self, request: &LlmRequest) -> Result<String> {
        (**self).fetch(request)
    }
}

impl<P: LlmProvider + ?Sized> LlmProvider for Box<P> {
    fn fetch(&self, request: &LlmRequest) -> Result<String> {
        (**self).fetch(request)
    }
}

/// Posts `{model, prompt, temperature, max_tokens}` as JSON to an endpoint.
pub struct HttpProvider {
    endpoint: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpProvider {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        Self {
            endpoint: endpoint.into(),
            api_key,
            agent,
        }
    }

    /// Reads `DESCRY_LLM_ENDPOINT` and the optional `DESCRY_LLM_API_KEY`.
    pub fn from_env() -> Result<Self> {
        let endpoint =
            std::env::var(ENV_ENDPOINT).map_err(|_| Error::Provider(format!("{ENV_ENDPOINT} is not set")))?;
        Ok(Self::new(endpoint, std::env::var(ENV_API_KEY).ok()))
    }
}

impl LlmProvider for HttpProvider {
    fn fetch(&self, request: &LlmRequest) -> Result<String> {
        let mut call = self
            .agent
            .post(&self.endpoint)
            .header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = call
            .send(request.to_json())
            .map_err(|e| Error::Provider(e.to_string()))?;
        response
            .body_mut()
            .read_to_string()
            .map_err(|e| Error::Provider(e.to_string()))
    }
}

/// Refuses every request; pair with [`CachedProvider`] for replay-only runs.
#[derive(Debug, Default, Clone, Copy)]
pub struct OfflineProvider;

impl LlmProvider for OfflineProvider {
    fn fetch(&self, request: &LlmRequest) -> Result<String> {
        Err(Error::Provider(format!(
            "offline and no cached response for request {}",
            request.cache_key()
        )))
    }
}

/// Serves requests from the cache directory, falling through to `inner` on a miss.
pub struct CachedProvider<P> {
    inner: P,
    dir: PathBuf,
    key_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl<P: LlmProvider> CachedProvider<P> {
    pub fn new(inner: P, dir: impl Into<PathBuf>) -> Self {
        Self {
            inner,
            dir: dir.into(),
            key_locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn entry_path(&self, request: &LlmRequest) -> PathBuf {
        self.dir.join(format!("{}.json", request.cache_key()))
    }

    fn read_cached(&self, path: &Path) -> Result<Option<String>> {
        match fs::read_to_string(path) {
            Ok(body) => Ok(Some(body)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    fn write_entry(&self, path: &Path, body: &str) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        crate::error::write_atomic(path, body.as_bytes())
    }
}

impl<P: LlmProvider> LlmProvider for CachedProvider<P> {
    fn fetch(&self, request: &LlmRequest) -> Result<String> {
        let path = self.entry_path(request);
        if let Some(body) = self.read_cached(&path)? {
            return Ok(body);
        }
        let lock = {
            let mut locks = self.key_locks.lock().expect("cache lock poisoned");
            locks.entry(request.cache_key()).or_default().clone()
        };
        let _guard = lock.lock().expect("cache key lock poisoned");
        // another writer may have filled the entry while we waited
        if let Some(body) = self.read_cached(&path)? {
            return Ok(body);
        }
        let body = self.inner.fetch(request)?;
        self.write_entry(&path, &body)?;
        Ok(body)
    }
}

/// Builds category dictionaries by querying an LLM.
pub struct DescriptorGenerator<P> {
    provider: P,
    model: String,
    few_shot: Vec<FewShotExemplar>,
}

impl<P: LlmProvider> DescriptorGenerator<P> {
    /// Uses the default model and the lemur exemplar.
    pub fn new(provider: P) -> Self {
        Self {
            provider,
            model: DEFAULT_MODEL.to_owned(),
            few_shot: vec![FewShotExemplar::lemur()],
        }
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self
    }

    pub fn with_few_shot(mut self, few_shot: Vec<FewShotExemplar>) -> Self {
        self.few_shot = few_shot;
        self
    }

    pub fn request_for(&self, display_name: &str) -> Result<LlmRequest> {
        Ok(LlmRequest::new(
            &self.model,
            build_prompt(display_name, &self.few_shot)?,
        ))
    }

    pub fn generate(&self, category_id: &str, display_name: &str) -> Result<CategoryDictionary> {
        let request = self.request_for(display_name)?;
        let response = self.provider.complete(&request)?;
        // the prompt ends with the first bullet's hyphen
        let phrases = parse_descriptors(&format!("-{}", response.text))?;
        CategoryDictionary::new(category_id, display_name, phrases)
    }
}
