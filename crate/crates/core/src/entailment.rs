//! Semantic-equivalence oracles and greedy clustering of responses.

use std::collections::{HashMap, HashSet};
use std::sync::Mutex;
use std::time::Duration;

use serde::Serialize;

use crate::error::{Error, ProviderError, Result};
use crate::http::JsonClient;
use crate::similarity::tokenize;

/// Decides whether two responses mean the same thing.
///
/// Implementations must be reflexive, symmetric and deterministic within a
/// run, and safe to call from several threads.
pub trait EquivalenceOracle: Send + Sync {
    fn equivalent(&self, a: &str, b: &str) -> Result<bool, ProviderError>;
}

impl<T: EquivalenceOracle + ?Sized> EquivalenceOracle for Box<T> {
    fn equivalent(&self, a: &str, b: &str) -> Result<bool, ProviderError> {
        (**self).equivalent(a, b)
    }
}

impl<T: EquivalenceOracle + ?Sized> EquivalenceOracle for &T {
    fn equivalent(&self, a: &str, b: &str) -> Result<bool, ProviderError> {
        (**self).equivalent(a, b)
    }
}

/// Equal after normalization by [`tokenize`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactMatchOracle;

pub fn exact_match_oracle() -> ExactMatchOracle {
    ExactMatchOracle
}

impl EquivalenceOracle for ExactMatchOracle {
    fn equivalent(&self, a: &str, b: &str) -> Result<bool, ProviderError> {
        Ok(a == b || tokenize(a) == tokenize(b))
    }
}

/// Jaccard similarity of token sets at or above a threshold.
#[derive(Debug, Clone, Copy)]
pub struct OverlapOracle {
    threshold: f64,
}

pub fn overlap_oracle(threshold: f64) -> Result<OverlapOracle> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!(
            "overlap threshold {threshold} outside [0,1]"
        )));
    }
    Ok(OverlapOracle { threshold })
}

impl OverlapOracle {
    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

/// Jaccard index of the token sets of `a` and `b`; two empty sets count as
/// identical.
pub fn jaccard(a: &str, b: &str) -> f64 {
    let ta = tokenize(a);
    let tb = tokenize(b);
    let sa: HashSet<&str> = ta.tokens().iter().map(String::as_str).collect();
    let sb: HashSet<&str> = tb.tokens().iter().map(String::as_str).collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 1.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

impl EquivalenceOracle for OverlapOracle {
    fn equivalent(&self, a: &str, b: &str) -> Result<bool, ProviderError> {
        Ok(a == b || jaccard(a, b) >= self.threshold)
    }
}

#[derive(Serialize)]
struct NliRequest<'a> {
    premise: &'a str,
    hypothesis: &'a str,
}

/// Bidirectional entailment via a remote NLI endpoint (`POST /nli`).
///
/// Results are memoized on the unordered text pair.
#[derive(Debug)]
pub struct RemoteNliOracle {
    client: JsonClient,
    cache: Mutex<HashMap<(String, String), bool>>,
}

pub fn remote_nli_oracle(endpoint: &str, timeout: Duration) -> RemoteNliOracle {
    RemoteNliOracle {
        client: JsonClient::new(endpoint, "/nli", timeout),
        cache: Mutex::new(HashMap::new()),
    }
}

impl RemoteNliOracle {
    pub fn endpoint(&self) -> &str {
        self.client.url()
    }

    fn entails(&self, premise: &str, hypothesis: &str) -> Result<bool, ProviderError> {
        let context = format!("pair ({premise:?} => {hypothesis:?})");
        let reply = self.client.post(
            &NliRequest {
                premise,
                hypothesis,
            },
            &context,
        )?;
        match reply.get("label").and_then(|v| v.as_str()) {
            Some("entailment") => Ok(true),
            Some("neutral") | Some("contradiction") => Ok(false),
            _ => Err(self.client.malformed(
                &context,
                format!("expected {{\"label\": ...}}, got `{reply}`"),
            )),
        }
    }
}

impl EquivalenceOracle for RemoteNliOracle {
    fn equivalent(&self, a: &str, b: &str) -> Result<bool, ProviderError> {
        if a == b {
            return Ok(true);
        }
        let key = if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(*hit);
        }
        // Both directions are always asked in canonical key order so the
        // cached verdict does not depend on argument order.
        let verdict = self.entails(&key.0, &key.1)? && self.entails(&key.1, &key.0)?;
        self.cache.lock().unwrap().insert(key, verdict);
        Ok(verdict)
    }
}

/// Partition of response indices into semantically equivalent sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Clustering {
    pub clusters: Vec<Vec<usize>>,
}

impl Clustering {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// True when the clusters are non-empty, disjoint and cover `0..n`.
    pub fn is_partition_of(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for c in &self.clusters {
            if c.is_empty() {
                return false;
            }
            for &i in c {
                if i >= n || seen[i] {
                    return false;
                }
                seen[i] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Greedy single pass: each response joins the first cluster whose first
/// member is equivalent to it, else starts a new cluster.
pub fn cluster<S: AsRef<str>, O: EquivalenceOracle + ?Sized>(
    responses: &[S],
    oracle: &O,
) -> Result<Clustering> {
    if responses.is_empty() {
        return Err(Error::EmptyInput("responses"));
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, r) in responses.iter().enumerate() {
        let mut placed = false;
        for c in clusters.iter_mut() {
            if oracle.equivalent(responses[c[0]].as_ref(), r.as_ref())? {
                c.push(i);
                placed = true;
                break;
            }
        }
        if !placed {
            clusters.push(vec![i]);
        }
    }
    Ok(Clustering { clusters })
}
