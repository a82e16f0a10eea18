use thiserror::Error;

/// Errors produced by corpus handling, estimation, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("document '{id}' is invalid: {reason}")]
    InvalidDocument { id: String, reason: String },

    #[error("no word types survived the frequency and stop-word filters")]
    EmptyVocabulary,

    #[error("min_count must be at least 1, got {0}")]
    InvalidMinCount(usize),

    #[error("count vector '{id}' is inconsistent: {reason}")]
    InvalidCounts { id: String, reason: String },

    #[error("class '{0}' has no reference texts")]
    EmptyClass(String),

    #[error("class '{0}' has no in-vocabulary tokens and alpha = 0")]
    UnsmoothedEmptyClass(String),

    #[error("smoothing constant must be finite and nonnegative, got {0}")]
    InvalidAlpha(f64),

    #[error("penalty weight must be finite and nonnegative, got {0}")]
    InvalidLambda(f64),

    #[error("convergence tolerance must be finite and positive, got {0}")]
    InvalidTolerance(f64),

    #[error("at least {expected} classes required, got {got}")]
    TooFewClasses { expected: usize, got: usize },

    #[error("operation requires a two-class model, got {0} classes")]
    TwoClassesRequired(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("affinity vector leaves the parameter space at component {component}")]
    InfeasibleTheta { component: usize },

    #[error("word index {0} is observed but has zero probability under every class")]
    ZeroProbabilityWord(usize),

    #[error("document has no in-vocabulary tokens and the penalty is zero")]
    EmptyDocumentCounts,

    #[error("information matrix is singular; standard errors unavailable")]
    SingularInformation,

    #[error("fit has not converged; refusing to compute diagnostics on it")]
    FitNotConverged,

    #[error("fit is on the boundary of the parameter space; diagnostics require an interior fit")]
    BoundaryFit,

    #[error("word '{0}' is not in the vocabulary")]
    UnknownWord(String),

    #[error("word '{0}' does not occur in the document")]
    WordNotObserved(String),

    #[error("the positive and negative dictionary lists overlap on '{0}'")]
    OverlappingDictionary(String),

    #[error("bootstrap needs at least 2 replicates, got {0}")]
    TooFewReplicates(usize),

    #[error("only {converged} of {total} bootstrap replicates converged; cannot form a standard error")]
    InsufficientConvergedReplicates { converged: usize, total: usize },

    #[error("model file is invalid: {0}")]
    InvalidModel(String),

    #[error("record on line {line} is invalid: {reason}")]
    InvalidRecord { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
