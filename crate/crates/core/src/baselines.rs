//! Self-consistency confidence baselines.
//!
//! Each baseline maps an ensemble of sampled responses to a confidence in
//! `[0, 1]`:
//!
//! | kind    | raw quantity                         | confidence            |
//! |---------|--------------------------------------|-----------------------|
//! | LexSim  | mean pairwise ROUGE-L F              | the mean itself       |
//! | PredEnt | MC entropy `-(1/N) Σ log p(r_n)`     | `exp(-PE)`            |
//! | SemEnt  | entropy over cluster masses          | `1 - SE / ln N`       |
//! | NumSets | number of clusters `K`               | `1 - (K-1)/(N-1)`     |
//!
//! Raw quantities are kept in [`BaselineScore::diagnostics`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Ensemble, ResponseSample};
use crate::entailment::{cluster, EquivalenceOracle};
use crate::error::{Error, Result};
use crate::similarity::{rouge_l_f, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    LexSim,
    PredEnt,
    SemEnt,
    NumSets,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [
        BaselineKind::LexSim,
        BaselineKind::PredEnt,
        BaselineKind::SemEnt,
        BaselineKind::NumSets,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BaselineKind::LexSim => "lexsim",
            BaselineKind::PredEnt => "predent",
            BaselineKind::SemEnt => "sement",
            BaselineKind::NumSets => "numsets",
        }
    }

    /// Whether the baseline needs an equivalence oracle.
    pub fn uses_oracle(&self) -> bool {
        matches!(self, BaselineKind::SemEnt | BaselineKind::NumSets)
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lexsim" => Ok(BaselineKind::LexSim),
            "predent" => Ok(BaselineKind::PredEnt),
            "sement" => Ok(BaselineKind::SemEnt),
            "numsets" => Ok(BaselineKind::NumSets),
            other => Err(Error::InvalidArgument(format!(
                "unknown baseline `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineScore {
    pub kind: BaselineKind,
    pub value: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

impl BaselineScore {
    fn new(kind: BaselineKind, value: f64) -> Self {
        Self {
            kind,
            value,
            diagnostics: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.diagnostics.insert(key.to_string(), v);
        self
    }
}

fn require_pairs(e: &Ensemble) -> Result<()> {
    if e.samples.len() < 2 {
        return Err(Error::Data(format!(
            "ensemble `{}` has {} samples; baselines need at least 2",
            e.id,
            e.samples.len()
        )));
    }
    Ok(())
}

/// Mean ROUGE-L F over the N(N-1)/2 unordered distinct pairs.
pub fn lexsim_confidence(e: &Ensemble) -> Result<BaselineScore> {
    require_pairs(e)?;
    let toks: Vec<_> = e.samples.iter().map(|s| tokenize(&s.text)).collect();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..toks.len() {
        for j in (i + 1)..toks.len() {
            sum += rouge_l_f(&toks[i], &toks[j]);
            pairs += 1;
        }
    }
    let value = (sum / pairs as f64).clamp(0.0, 1.0);
    Ok(BaselineScore::new(BaselineKind::LexSim, value).with("pairs", pairs as f64))
}

/// Log-probability of a whole response: the sum of its token log-probs.
pub fn response_logprob(s: &ResponseSample) -> Result<f64> {
    match &s.token_logprobs {
        Some(lps) if !lps.is_empty() => Ok(lps.iter().sum()),
        _ => Err(Error::Data(
            "response has no token log-probabilities".into(),
        )),
    }
}

fn all_logprobs(e: &Ensemble) -> Result<Vec<f64>> {
    e.samples
        .iter()
        .enumerate()
        .map(|(i, s)| response_logprob(s).map_err(|err| err.in_sample(i)))
        .collect()
}

pub fn predent_confidence(e: &Ensemble) -> Result<BaselineScore> {
    require_pairs(e)?;
    let lps = all_logprobs(e)?;
    let pe = -lps.iter().sum::<f64>() / lps.len() as f64;
    let value = (-pe).exp().clamp(0.0, 1.0);
    Ok(BaselineScore::new(BaselineKind::PredEnt, value).with("predictive_entropy", pe))
}

/// Normalized cluster masses from per-response log-probabilities.
///
/// A cluster's raw mass is the mean probability of its members. Log-probs
/// are shifted by their maximum before exponentiation; the shift cancels in
/// the normalization.
pub fn cluster_masses(clusters: &[Vec<usize>], logprobs: &[f64]) -> Result<Vec<f64>> {
    let shift = logprobs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::DegenerateMass);
    }
    let raw: Vec<f64> = clusters
        .iter()
        .map(|c| c.iter().map(|&i| (logprobs[i] - shift).exp()).sum::<f64>() / c.len() as f64)
        .collect();
    let total: f64 = raw.iter().sum();
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::DegenerateMass);
    }
    Ok(raw.into_iter().map(|m| m / total).collect())
}

/// Natural-log Shannon entropy, skipping zero-mass entries.
pub fn entropy(masses: &[f64]) -> f64 {
    -masses
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Semantic-entropy confidence `1 - SE / ln N` from normalized masses.
pub fn sement_from_masses(masses: &[f64], n: usize) -> f64 {
    if masses.len() <= 1 {
        return 1.0;
    }
    let se = entropy(masses);
    (1.0 - se / (n as f64).ln()).clamp(0.0, 1.0)
}

pub fn sement_confidence<O: EquivalenceOracle + ?Sized>(
    e: &Ensemble,
    oracle: &O,
) -> Result<BaselineScore> {
    require_pairs(e)?;
    let lps = all_logprobs(e)?;
    let clustering = cluster(&e.texts(), oracle)?;
    let masses = cluster_masses(&clustering.clusters, &lps)?;
    let se = entropy(&masses);
    let value = sement_from_masses(&masses, e.samples.len());
    Ok(BaselineScore::new(BaselineKind::SemEnt, value)
        .with("semantic_entropy", se)
        .with("clusters", clustering.len() as f64))
}

/// NumSets confidence `1 - (K-1)/(N-1)`.
pub fn numsets_from_count(k: usize, n: usize) -> f64 {
    (1.0 - (k as f64 - 1.0) / (n as f64 - 1.0)).clamp(0.0, 1.0)
}

pub fn numsets_confidence<O: EquivalenceOracle + ?Sized>(
    e: &Ensemble,
    oracle: &O,
) -> Result<BaselineScore> {
    require_pairs(e)?;
    let k = cluster(&e.texts(), oracle)?.len();
    Ok(BaselineScore::new(
        BaselineKind::NumSets,
        numsets_from_count(k, e.samples.len()),
    )
    .with("clusters", k as f64))
}

/// Dispatches to the baseline named by `kind`.
pub fn baseline_confidence<O: EquivalenceOracle + ?Sized>(
    kind: BaselineKind,
    e: &Ensemble,
    oracle: &O,
) -> Result<BaselineScore> {
    match kind {
        BaselineKind::LexSim => lexsim_confidence(e),
        BaselineKind::PredEnt => predent_confidence(e),
        BaselineKind::SemEnt => sement_confidence(e, oracle),
        BaselineKind::NumSets => numsets_confidence(e, oracle),
    }
}
