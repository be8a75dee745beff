//! Grounding-model confidence providers and the ensemble-level mean.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;
use std::time::Duration;

use serde::Serialize;

use crate::corpus::Ensemble;
use crate::error::{Error, ProviderError, Result};
use crate::http::JsonClient;

/// Prompt for instructing a foundation model to act as a verdict-mode
/// grounding model. `{response_text}` is replaced by the statement.
pub const VERDICT_PROMPT_TEMPLATE: &str = "I have an image and a short statement that describes a specific part of the image. \
Your job is to verify if this statement accurately reflects what is shown in the image.\n\n\
Image: <Attached above>\n\n\
Statement: \"{response_text}\"\n\n\
Instructions: Respond with only one word \u{2014} either \"Yes\" if the statement is correct, \"No\" if the statement is incorrect, \
or \"Not sure\" if you are uncertain. Do not provide any additional explanations.";

/// Fills [`VERDICT_PROMPT_TEMPLATE`] with a statement.
pub fn verdict_prompt(statement: &str) -> String {
    VERDICT_PROMPT_TEMPLATE.replace("{response_text}", statement)
}

/// One grounding request: which response of which ensemble, and the
/// (image, statement) pair sent to a grounding model.
#[derive(Debug, Clone, Copy)]
pub struct GroundingQuery<'a> {
    pub ensemble_id: &'a str,
    pub sample_index: usize,
    pub image_ref: &'a str,
    pub statement: &'a str,
}

/// Source of per-response grounding confidences in `[0, 1]`.
pub trait GroundingProvider: Send + Sync {
    fn confidence(&self, query: &GroundingQuery<'_>) -> Result<f64, ProviderError>;
}

impl<T: GroundingProvider + ?Sized> GroundingProvider for Box<T> {
    fn confidence(&self, query: &GroundingQuery<'_>) -> Result<f64, ProviderError> {
        (**self).confidence(query)
    }
}

impl<T: GroundingProvider + ?Sized> GroundingProvider for &T {
    fn confidence(&self, query: &GroundingQuery<'_>) -> Result<f64, ProviderError> {
        (**self).confidence(query)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    Yes,
    No,
    NotSure,
}

impl FromStr for Verdict {
    type Err = ProviderError;

    fn from_str(s: &str) -> Result<Self, ProviderError> {
        let norm: String = s
            .trim()
            .trim_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace())
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
            .to_lowercase();
        match norm.as_str() {
            "yes" => Ok(Verdict::Yes),
            "no" => Ok(Verdict::No),
            "not sure" | "notsure" => Ok(Verdict::NotSure),
            _ => Err(ProviderError::UnknownVerdict {
                reply: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "Yes",
            Verdict::No => "No",
            Verdict::NotSure => "Not sure",
        })
    }
}

/// Confidence assigned to each verdict. The default follows the usual
/// convention for foundation-model grounding: only "Yes" earns confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerdictMapping {
    pub not_sure: f64,
}

impl Default for VerdictMapping {
    fn default() -> Self {
        Self { not_sure: 0.0 }
    }
}

impl VerdictMapping {
    pub fn map(&self, v: Verdict) -> f64 {
        match v {
            Verdict::Yes => 1.0,
            Verdict::No => 0.0,
            Verdict::NotSure => self.not_sure,
        }
    }
}

pub fn map_verdict(v: Verdict) -> f64 {
    VerdictMapping::default().map(v)
}

/// Replays grounding confidences recorded in a dataset.
#[derive(Debug, Clone, Default)]
pub struct OfflineProvider {
    recorded: HashMap<String, Vec<Option<f64>>>,
}

pub fn offline_provider(dataset: &[Ensemble]) -> OfflineProvider {
    OfflineProvider {
        recorded: dataset
            .iter()
            .map(|e| {
                (
                    e.id.clone(),
                    e.samples.iter().map(|s| s.grounding_conf).collect(),
                )
            })
            .collect(),
    }
}

impl GroundingProvider for OfflineProvider {
    fn confidence(&self, q: &GroundingQuery<'_>) -> Result<f64, ProviderError> {
        self.recorded
            .get(q.ensemble_id)
            .and_then(|v| v.get(q.sample_index).copied().flatten())
            .ok_or_else(|| ProviderError::MissingGrounding {
                ensemble_id: q.ensemble_id.to_string(),
                sample_index: q.sample_index,
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RemoteMode {
    Verdict,
    Score,
}

impl FromStr for RemoteMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "verdict" => Ok(RemoteMode::Verdict),
            "score" => Ok(RemoteMode::Score),
            other => Err(Error::InvalidArgument(format!(
                "grounding mode `{other}` (expected verdict|score)"
            ))),
        }
    }
}

#[derive(Serialize)]
struct GroundRequest<'a> {
    image_ref: &'a str,
    statement: &'a str,
}

/// Grounding model behind `POST /ground`, memoized per (image, statement).
#[derive(Debug)]
pub struct RemoteProvider {
    client: JsonClient,
    mode: RemoteMode,
    mapping: VerdictMapping,
    cache: Option<Mutex<HashMap<(String, String), f64>>>,
}

pub fn remote_provider(endpoint: &str, mode: RemoteMode, timeout: Duration) -> RemoteProvider {
    RemoteProvider {
        client: JsonClient::new(endpoint, "/ground", timeout),
        mode,
        mapping: VerdictMapping::default(),
        cache: Some(Mutex::new(HashMap::new())),
    }
}

impl RemoteProvider {
    pub fn with_mapping(mut self, mapping: VerdictMapping) -> Self {
        self.mapping = mapping;
        self
    }

    pub fn without_cache(mut self) -> Self {
        self.cache = None;
        self
    }

    pub fn endpoint(&self) -> &str {
        self.client.url()
    }

    fn fetch(&self, image_ref: &str, statement: &str) -> Result<f64, ProviderError> {
        let context = format!("image {image_ref:?}, statement {statement:?}");
        let reply = self.client.post(
            &GroundRequest {
                image_ref,
                statement,
            },
            &context,
        )?;
        match self.mode {
            RemoteMode::Verdict => {
                let text = reply
                    .get("verdict")
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| {
                        self.client.malformed(
                            &context,
                            format!("expected {{\"verdict\": str}}, got `{reply}`"),
                        )
                    })?;
                Ok(self.mapping.map(text.parse()?))
            }
            RemoteMode::Score => {
                let score = reply.get("score").and_then(|v| v.as_f64()).ok_or_else(|| {
                    self.client.malformed(
                        &context,
                        format!("expected {{\"score\": number}}, got `{reply}`"),
                    )
                })?;
                if !(0.0..=1.0).contains(&score) {
                    log::warn!(
                        "{}: score {score} for {context} outside [0,1]; clamping",
                        self.client.url()
                    );
                }
                Ok(score.clamp(0.0, 1.0))
            }
        }
    }
}

impl GroundingProvider for RemoteProvider {
    fn confidence(&self, q: &GroundingQuery<'_>) -> Result<f64, ProviderError> {
        let Some(cache) = &self.cache else {
            return self.fetch(q.image_ref, q.statement);
        };
        let key = (q.image_ref.to_string(), q.statement.to_string());
        if let Some(hit) = cache.lock().unwrap().get(&key) {
            return Ok(*hit);
        }
        let v = self.fetch(q.image_ref, q.statement)?;
        cache.lock().unwrap().insert(key, v);
        Ok(v)
    }
}

/// Mean grounding confidence over all samples of an ensemble.
pub fn ensemble_grounding_conf<P: GroundingProvider + ?Sized>(e: &Ensemble, p: &P) -> Result<f64> {
    if e.samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    let mut sum = 0.0;
    for (i, s) in e.samples.iter().enumerate() {
        let q = GroundingQuery {
            ensemble_id: &e.id,
            sample_index: i,
            image_ref: &e.image_ref,
            statement: &s.text,
        };
        sum += p
            .confidence(&q)
            .map_err(|err| Error::Provider(err).in_sample(i))?;
    }
    Ok((sum / e.samples.len() as f64).clamp(0.0, 1.0))
}
