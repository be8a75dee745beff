//! Confidence calibration for multi-modal LLM response ensembles.
//!
//! The crate scores each ensemble of sampled responses with a
//! self-consistency baseline ([`baselines`]), optionally fuses that score
//! with a grounding model's confidence ([`grounding`], [`calibration`]),
//! fits the fusion hyperparameters on validation splits and reports test
//! Expected Calibration Error ([`metrics`]) with reliability diagrams and
//! summary tables ([`report`]).

pub mod baselines;
pub mod calibration;
pub mod corpus;
pub mod entailment;
pub mod error;
pub mod grounding;
mod http;
pub mod metrics;
pub mod mock;
pub mod report;
pub mod rng;
pub mod similarity;
pub mod synth;

pub use baselines::{BaselineKind, BaselineScore};
pub use calibration::{CalibrationParams, Grid, GridRange};
pub use corpus::{Ensemble, ResponseSample, SplitSpec};
pub use entailment::{Clustering, EquivalenceOracle};
pub use error::{CorpusError, Error, ProviderError, Result};
pub use grounding::{GroundingProvider, Verdict};
pub use metrics::{AggregateSummary, EceReport, EvalConfig, RunSummary};
