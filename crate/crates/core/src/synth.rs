//! Synthetic ensembles with controllable consistency and accuracy.
//!
//! Three archetypes:
//!
//! * **consistent-correct**: every sample is the same correct answer.
//! * **consistent-wrong**: every sample is the same wrong answer. Self-
//!   consistency baselines are maximally confident here while accuracy is 0.
//! * **inconsistent**: samples are drawn from several candidate answers, one
//!   of which is correct.
//!
//! Identical answers share their token log-probabilities within an ensemble.
//! Grounding confidences are drawn per sample: with probability
//! `grounding_fidelity` they follow the sample's correctness (correct in
//! `[0.8, 1]`, wrong in `[0, 0.2]`), otherwise the signal is flipped.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{round_half_even, Ensemble, ResponseSample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Archetype {
    ConsistentCorrect,
    ConsistentWrong,
    Inconsistent,
}

impl Archetype {
    pub fn as_str(&self) -> &'static str {
        match self {
            Archetype::ConsistentCorrect => "consistent_correct",
            Archetype::ConsistentWrong => "consistent_wrong",
            Archetype::Inconsistent => "inconsistent",
        }
    }
}

/// Key under which each generated ensemble records its archetype.
pub const ARCHETYPE_FIELD: &str = "archetype";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_ensembles: usize,
    pub n_samples: usize,
    pub frac_consistent_wrong: f64,
    /// Share of inconsistent ensembles, taken from what remains after the
    /// consistent-wrong ones.
    pub frac_inconsistent: f64,
    pub grounding_fidelity: f64,
    pub vocab_size: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_ensembles: 300,
            n_samples: 20,
            frac_consistent_wrong: 1.0 / 3.0,
            frac_inconsistent: 0.5,
            grounding_fidelity: 0.9,
            vocab_size: 64,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let frac = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "{name} = {v} outside [0,1]"
                )))
            }
        };
        frac("frac_consistent_wrong", self.frac_consistent_wrong)?;
        frac("frac_inconsistent", self.frac_inconsistent)?;
        frac("grounding_fidelity", self.grounding_fidelity)?;
        if self.n_ensembles == 0 {
            return Err(Error::InvalidArgument(
                "n_ensembles must be positive".into(),
            ));
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidArgument(
                "n_samples must be at least 2".into(),
            ));
        }
        if self.vocab_size < 8 {
            return Err(Error::InvalidArgument(
                "vocab_size must be at least 8".into(),
            ));
        }
        Ok(())
    }

    /// Number of ensembles per archetype:
    /// (consistent-correct, consistent-wrong, inconsistent).
    pub fn archetype_counts(&self) -> (usize, usize, usize) {
        let n = self.n_ensembles;
        let wrong = (round_half_even(self.frac_consistent_wrong * n as f64) as usize).min(n);
        let incons = (round_half_even(self.frac_inconsistent * n as f64) as usize).min(n - wrong);
        (n - wrong - incons, wrong, incons)
    }
}

struct Generator {
    rng: ChaCha8Rng,
    vocab: Vec<String>,
    fidelity: f64,
}

impl Generator {
    fn phrase(&mut self) -> Vec<String> {
        let len = self.rng.random_range(1..=3);
        (0..len)
            .map(|_| self.vocab[self.rng.random_range(0..self.vocab.len())].clone())
            .collect()
    }

    /// `k` answers with pairwise distinct token sequences.
    fn distinct_phrases(&mut self, k: usize) -> Vec<Vec<String>> {
        let mut out: Vec<Vec<String>> = Vec::with_capacity(k);
        while out.len() < k {
            let p = self.phrase();
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    fn logprobs(&mut self, tokens: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..tokens)
            .map(|_| {
                let v: f64 = self.rng.random_range(lo..=hi);
                // Round so the values survive a text round-trip unchanged and
                // stay <= 0.
                ((v * 1e6).round() / 1e6).min(0.0)
            })
            .collect()
    }

    fn grounding(&mut self, correct: bool) -> f64 {
        let faithful = self.rng.random_bool(self.fidelity);
        let high = correct == faithful;
        let v: f64 = if high {
            self.rng.random_range(0.8..=1.0)
        } else {
            self.rng.random_range(0.0..=0.2)
        };
        (v * 1e6).round() / 1e6
    }

    fn sample(&mut self, tokens: &[String], lps: &[f64], correct: bool) -> ResponseSample {
        let g = self.grounding(correct);
        ResponseSample::new(tokens.join(" "), lps.to_vec())
            .with_grounding(g)
            .with_correct(correct)
    }

    fn consistent(&mut self, n: usize, correct: bool) -> Vec<ResponseSample> {
        let answer = self.phrase();
        let lps = self.logprobs(answer.len(), -0.1, 0.0);
        (0..n)
            .map(|_| self.sample(&answer, &lps, correct))
            .collect()
    }

    fn inconsistent(&mut self, n: usize) -> Vec<ResponseSample> {
        let k = self.rng.random_range(3..=6).min(n);
        let answers = self.distinct_phrases(k);
        let lps: Vec<Vec<f64>> = answers
            .iter()
            .map(|a| self.logprobs(a.len(), -2.0, -0.5))
            .collect();
        let p_correct: f64 = self.rng.random_range(0.2..=0.8);
        let mut picks: Vec<usize> = (0..n)
            .map(|_| {
                if self.rng.random_bool(p_correct) {
                    0
                } else {
                    self.rng.random_range(1..k)
                }
            })
            .collect();
        // At least one correct and one wrong answer.
        picks[0] = 0;
        picks[1] = self.rng.random_range(1..k);
        picks.shuffle(&mut self.rng);
        picks
            .into_iter()
            .map(|a| self.sample(&answers[a], &lps[a], a == 0))
            .collect()
    }
}

/// Generates `cfg.n_ensembles` ensembles, deterministic in `cfg.seed`.
pub fn generate(cfg: &SynthConfig) -> Result<Vec<Ensemble>> {
    cfg.validate()?;
    let (n_correct, n_wrong, n_incons) = cfg.archetype_counts();
    let mut gen = Generator {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        vocab: (0..cfg.vocab_size).map(|i| format!("w{i}")).collect(),
        fidelity: cfg.grounding_fidelity,
    };
    let mut kinds: Vec<Archetype> = std::iter::repeat_n(Archetype::ConsistentCorrect, n_correct)
        .chain(std::iter::repeat_n(Archetype::ConsistentWrong, n_wrong))
        .chain(std::iter::repeat_n(Archetype::Inconsistent, n_incons))
        .collect();
    kinds.shuffle(&mut gen.rng);

    let width = cfg.n_ensembles.to_string().len();
    Ok(kinds
        .into_iter()
        .enumerate()
        .map(|(i, kind)| {
            let samples = match kind {
                Archetype::ConsistentCorrect => gen.consistent(cfg.n_samples, true),
                Archetype::ConsistentWrong => gen.consistent(cfg.n_samples, false),
                Archetype::Inconsistent => gen.inconsistent(cfg.n_samples),
            };
            let correct = samples.iter().filter(|s| s.correct == Some(true)).count();
            let mut e = Ensemble::new(format!("synth-{i:0width$}"), samples);
            e.question = format!("synthetic question {i}");
            e.image_ref = format!("synth://image/{i}");
            e.accuracy = Some(correct as f64 / cfg.n_samples as f64);
            e.extra.insert(ARCHETYPE_FIELD.into(), kind.as_str().into());
            e
        })
        .collect())
}

/// Archetype recorded on a generated ensemble, if any.
pub fn archetype_of(e: &Ensemble) -> Option<Archetype> {
    match e.extra.get(ARCHETYPE_FIELD)?.as_str()? {
        "consistent_correct" => Some(Archetype::ConsistentCorrect),
        "consistent_wrong" => Some(Archetype::ConsistentWrong),
        "inconsistent" => Some(Archetype::Inconsistent),
        _ => None,
    }
}
