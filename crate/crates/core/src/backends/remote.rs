//! HTTP adapters.
//!
//! Wire formats (all JSON, `POST`, optional `Authorization: Bearer <key>`):
//!
//! * classifier: `{"model", "pairs": [{"premise", "hypothesis"}]}` →
//!   `{"distributions": [{"p_e", "p_n", "p_c"}]}`, one entry per pair in order
//! * decomposer: `{"model", "hypothesis"}` → `{"atoms": [string]}`
//! * generator: OpenAI-style chat completion,
//!   `{"model", "messages": [{"role": "user", "content"}], "temperature": 0}` →
//!   `{"choices": [{"message": {"content"}}]}`
//!
//! Every distribution is validated on arrival.

use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{Classifier, Decomposer, Generator};
use crate::error::{Error, Result};
use crate::label::LabelDistribution;

const TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Clone)]
struct Endpoint {
    name: String,
    url: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl std::fmt::Debug for Endpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Endpoint")
            .field("name", &self.name)
            .field("url", &self.url)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

impl Endpoint {
    fn new(name: &str, url: &str, api_key: Option<String>) -> Result<Self> {
        if url.trim().is_empty() {
            return Err(Error::BackendUnavailable(format!("{name}: endpoint is empty")));
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(TIMEOUT))
            .build()
            .into();
        Ok(Self {
            name: name.to_string(),
            url: url.to_string(),
            api_key,
            agent,
        })
    }

    fn post<B: Serialize, R: DeserializeOwned>(&self, body: &B) -> Result<R> {
        let mut req = self.agent.post(&self.url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(body)
            .map_err(|e| Error::Backend(format!("{} ({}): {e}", self.name, self.url)))?;
        resp.body_mut()
            .read_json::<R>()
            .map_err(|e| Error::Backend(format!("{}: malformed response: {e}", self.name)))
    }
}

#[derive(Debug, Clone)]
pub struct RemoteClassifier {
    endpoint: Endpoint,
}

#[derive(Serialize)]
struct PairBody<'a> {
    premise: &'a str,
    hypothesis: &'a str,
}

#[derive(Serialize)]
struct ClassifyRequest<'a> {
    model: &'a str,
    pairs: Vec<PairBody<'a>>,
}

#[derive(Deserialize)]
struct RawDist {
    p_e: f64,
    p_n: f64,
    p_c: f64,
}

#[derive(Deserialize)]
struct ClassifyResponse {
    distributions: Vec<RawDist>,
}

impl RemoteClassifier {
    pub fn new(name: &str, url: &str, api_key: Option<String>) -> Result<Self> {
        Ok(Self {
            endpoint: Endpoint::new(name, url, api_key)?,
        })
    }
}

impl Classifier for RemoteClassifier {
    fn name(&self) -> &str {
        &self.endpoint.name
    }

    fn classify(&self, premise: &str, claim: &str) -> Result<LabelDistribution> {
        let mut out = self.classify_batch(&[(premise, claim)])?;
        Ok(out.remove(0))
    }

    fn classify_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<LabelDistribution>> {
        if pairs.is_empty() {
            return Ok(Vec::new());
        }
        let req = ClassifyRequest {
            model: &self.endpoint.name,
            pairs: pairs
                .iter()
                .map(|(p, h)| PairBody { premise: p, hypothesis: h })
                .collect(),
        };
        let resp: ClassifyResponse = self.endpoint.post(&req)?;
        if resp.distributions.len() != pairs.len() {
            return Err(Error::Backend(format!(
                "{}: {} distributions for {} pairs",
                self.endpoint.name,
                resp.distributions.len(),
                pairs.len()
            )));
        }
        resp.distributions
            .into_iter()
            .map(|d| {
                LabelDistribution::new(d.p_e, d.p_n, d.p_c)
                    .map_err(|e| Error::Backend(format!("{}: {e}", self.endpoint.name)))
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RemoteDecomposer {
    endpoint: Endpoint,
}

#[derive(Serialize)]
struct DecomposeRequest<'a> {
    model: &'a str,
    hypothesis: &'a str,
}

#[derive(Deserialize)]
struct DecomposeResponse {
    atoms: Vec<String>,
}

impl RemoteDecomposer {
    pub fn new(name: &str, url: &str, api_key: Option<String>) -> Result<Self> {
        Ok(Self {
            endpoint: Endpoint::new(name, url, api_key)?,
        })
    }
}

impl Decomposer for RemoteDecomposer {
    fn name(&self) -> &str {
        &self.endpoint.name
    }

    fn decompose(&self, hypothesis: &str) -> Result<Vec<String>> {
        let resp: DecomposeResponse = self.endpoint.post(&DecomposeRequest {
            model: &self.endpoint.name,
            hypothesis,
        })?;
        Ok(resp.atoms)
    }
}

#[derive(Debug, Clone)]
pub struct RemoteGenerator {
    endpoint: Endpoint,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f64,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatReply,
}

#[derive(Deserialize)]
struct ChatReply {
    content: String,
}

impl RemoteGenerator {
    pub fn new(name: &str, url: &str, api_key: Option<String>) -> Result<Self> {
        Ok(Self {
            endpoint: Endpoint::new(name, url, api_key)?,
        })
    }
}

impl Generator for RemoteGenerator {
    fn name(&self) -> &str {
        &self.endpoint.name
    }

    fn complete(&self, prompt: &str) -> Result<String> {
        let resp: ChatResponse = self.endpoint.post(&ChatRequest {
            model: &self.endpoint.name,
            messages: [ChatMessage {
                role: "user",
                content: prompt,
            }],
            temperature: 0.0,
        })?;
        resp.choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| Error::Backend(format!("{}: no choices in response", self.endpoint.name)))
    }
}
