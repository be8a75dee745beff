use thiserror::Error;

/// Failures raised while reading or validating an ensemble dataset.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}: field `{field}`: {message}")]
    Schema {
        line: usize,
        field: String,
        message: String,
    },

    #[error("line {line}: duplicate ensemble id `{id}`")]
    DuplicateId { line: usize, id: String },

    #[error("no ensembles in input")]
    NoEnsembles,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CorpusError {
    /// Line number (1-based) the error refers to, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            CorpusError::Malformed { line, .. }
            | CorpusError::Schema { line, .. }
            | CorpusError::DuplicateId { line, .. } => Some(*line),
            CorpusError::NoEnsembles | CorpusError::Io(_) => None,
        }
    }
}

/// Failures of a pluggable grounding provider or equivalence oracle.
#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("{endpoint}: network failure for {context}: {message}")]
    Network {
        endpoint: String,
        context: String,
        message: String,
    },

    #[error("{endpoint}: timed out for {context}")]
    Timeout { endpoint: String, context: String },

    #[error("{endpoint}: non-conforming response for {context}: {message}")]
    Malformed {
        endpoint: String,
        context: String,
        message: String,
    },

    #[error("unrecognized verdict reply `{reply}`")]
    UnknownVerdict { reply: String },

    #[error("ensemble `{ensemble_id}` sample {sample_index}: missing grounding_conf")]
    MissingGrounding {
        ensemble_id: String,
        sample_index: usize,
    },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] CorpusError),

    #[error(transparent)]
    Provider(#[from] ProviderError),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("sample {sample_index}: {source}")]
    Sample {
        sample_index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("all cluster masses are zero; cannot form a distribution")]
    DegenerateMass,

    #[error("inconsistent method sets across runs: {0}")]
    InconsistentRuns(String),

    #[error("ensemble `{id}`: {source}")]
    Ensemble {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("run {run}: {source}")]
    Run {
        run: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn in_ensemble(self, id: &str) -> Self {
        Error::Ensemble {
            id: id.to_string(),
            source: Box::new(self),
        }
    }

    pub(crate) fn in_sample(self, sample_index: usize) -> Self {
        Error::Sample {
            sample_index,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_run(self, run: usize) -> Self {
        Error::Run {
            run,
            source: Box::new(self),
        }
    }

    /// Innermost error after unwrapping ensemble/run/sample context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Ensemble { source, .. }
            | Error::Run { source, .. }
            | Error::Sample { source, .. } => source.root(),
            other => other,
        }
    }

    /// True when the root cause is a provider/oracle failure.
    pub fn is_provider(&self) -> bool {
        matches!(self.root(), Error::Provider(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
