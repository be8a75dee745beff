//! Response-ensemble records: schema, parsing, accuracy and splits.
//!
//! One record per line:
//!
//! ```text
//! {"id": str, "question": str, "image_ref": str, "accuracy": float?,
//!  "samples": [{"text": str, "token_logprobs": [float],
//!               "grounding_conf": float?, "correct": bool?}]}
//! ```
//!
//! Unknown fields are kept in `extra` and written back on serialization.

use std::collections::HashSet;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CorpusError, Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseSample {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_logprobs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grounding_conf: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl ResponseSample {
    pub fn new(text: impl Into<String>, token_logprobs: Vec<f64>) -> Self {
        Self {
            text: text.into(),
            token_logprobs: Some(token_logprobs),
            grounding_conf: None,
            correct: None,
            extra: Map::new(),
        }
    }

    pub fn with_grounding(mut self, conf: f64) -> Self {
        self.grounding_conf = Some(conf);
        self
    }

    pub fn with_correct(mut self, correct: bool) -> Self {
        self.correct = Some(correct);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub id: String,
    pub question: String,
    pub image_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    pub samples: Vec<ResponseSample>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Ensemble {
    pub fn new(id: impl Into<String>, samples: Vec<ResponseSample>) -> Self {
        Self {
            id: id.into(),
            question: String::new(),
            image_ref: String::new(),
            accuracy: None,
            samples,
            extra: Map::new(),
        }
    }

    /// Number of sampled responses.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.samples.iter().map(|s| s.text.as_str()).collect()
    }

    /// Checks every type invariant, returning `(field path, message)` on the
    /// first violation.
    pub fn check(&self) -> std::result::Result<(), (String, String)> {
        if self.samples.len() < 2 {
            return Err((
                "samples".into(),
                format!("need at least 2 samples, got {}", self.samples.len()),
            ));
        }
        if let Some(acc) = self.accuracy {
            if !(0.0..=1.0).contains(&acc) {
                return Err(("accuracy".into(), format!("{acc} outside [0,1]")));
            }
        }
        for (i, s) in self.samples.iter().enumerate() {
            if let Some(lps) = &s.token_logprobs {
                if lps.is_empty() {
                    return Err((
                        format!("samples[{i}].token_logprobs"),
                        "must be non-empty when present".into(),
                    ));
                }
                if let Some((j, lp)) = lps
                    .iter()
                    .enumerate()
                    .find(|(_, lp)| lp.is_nan() || **lp > 0.0)
                {
                    return Err((
                        format!("samples[{i}].token_logprobs[{j}]"),
                        format!("log-probability {lp} must be <= 0"),
                    ));
                }
            }
            if let Some(g) = s.grounding_conf {
                if !(0.0..=1.0).contains(&g) {
                    return Err((
                        format!("samples[{i}].grounding_conf"),
                        format!("{g} outside [0,1]"),
                    ));
                }
            }
            if self.accuracy.is_none() && s.correct.is_none() {
                return Err((
                    format!("samples[{i}].correct"),
                    "required when `accuracy` is absent".into(),
                ));
            }
        }
        Ok(())
    }

    /// Canonical single-line JSON encoding.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("ensemble serialization cannot fail")
    }
}

/// Validation/test split configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub validation_fraction: f64,
    pub seed: u64,
    pub repetitions: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            validation_fraction: 0.2,
            seed: 0,
            repetitions: 5,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "validation_fraction {} must lie in (0,1)",
                self.validation_fraction
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidArgument("repetitions must be >= 1".into()));
        }
        Ok(())
    }
}

/// Parses a line-delimited record stream. Blank lines are skipped but still
/// counted for line numbers.
pub fn parse_dataset<R: BufRead>(source: R) -> Result<Vec<Ensemble>, CorpusError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e = parse_record(&line, line_no)?;
        if !seen.insert(e.id.clone()) {
            return Err(CorpusError::DuplicateId {
                line: line_no,
                id: e.id,
            });
        }
        out.push(e);
    }
    Ok(out)
}

pub fn parse_str(text: &str) -> Result<Vec<Ensemble>, CorpusError> {
    parse_dataset(text.as_bytes())
}

/// Parses and validates a single record.
pub fn parse_record(line: &str, line_no: usize) -> Result<Ensemble, CorpusError> {
    let e: Ensemble = serde_json::from_str(line).map_err(|err| CorpusError::Malformed {
        line: line_no,
        message: err.to_string(),
    })?;
    e.check().map_err(|(field, message)| CorpusError::Schema {
        line: line_no,
        field,
        message,
    })?;
    Ok(e)
}

/// Writes ensembles in canonical form, one per line, each newline-terminated.
pub fn serialize_dataset(data: &[Ensemble]) -> String {
    let mut out = String::new();
    for e in data {
        out.push_str(&e.to_json_line());
        out.push('\n');
    }
    out
}

/// Per-ensemble accuracy: the explicit `accuracy` field when present,
/// otherwise the fraction of samples flagged correct.
pub fn ensemble_accuracy(e: &Ensemble) -> f64 {
    if let Some(acc) = e.accuracy {
        return acc;
    }
    if e.samples.is_empty() {
        return 0.0;
    }
    let correct = e.samples.iter().filter(|s| s.correct == Some(true)).count();
    correct as f64 / e.samples.len() as f64
}

/// `round(x)` with ties to even.
pub(crate) fn round_half_even(x: f64) -> f64 {
    let r = x.round();
    if (x - x.trunc()).abs() == 0.5 {
        2.0 * (x / 2.0).round()
    } else {
        r
    }
}

/// Number of validation items for a dataset of size `n`.
pub fn validation_size(n: usize, fraction: f64) -> usize {
    round_half_even(fraction * n as f64) as usize
}

/// Deterministic partition of `data` into (validation, test).
///
/// Indices `0..n` are shuffled by Fisher-Yates driven by
/// [`SplitMix64::for_run`]; the first `round_half_even(f * n)` shuffled
/// indices form the validation set. Both halves keep input order.
pub fn split<'a>(
    data: &'a [Ensemble],
    spec: &SplitSpec,
    run_index: usize,
) -> Result<(Vec<&'a Ensemble>, Vec<&'a Ensemble>)> {
    let (val, test) = split_indices(data.len(), spec, run_index)?;
    Ok((
        val.into_iter().map(|i| &data[i]).collect(),
        test.into_iter().map(|i| &data[i]).collect(),
    ))
}

/// Index form of [`split`].
pub fn split_indices(
    n: usize,
    spec: &SplitSpec,
    run_index: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::EmptyInput("dataset"));
    }
    if run_index >= spec.repetitions {
        return Err(Error::InvalidArgument(format!(
            "run_index {run_index} >= repetitions {}",
            spec.repetitions
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    SplitMix64::for_run(spec.seed, run_index as u64).shuffle(&mut order);
    let k = validation_size(n, spec.validation_fraction);
    let mut val = order[..k].to_vec();
    let mut test = order[k..].to_vec();
    val.sort_unstable();
    test.sort_unstable();
    Ok((val, test))
}
