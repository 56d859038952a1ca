use thiserror::Error;

/// Errors produced by trace ingestion, validation and analysis.
#[derive(Debug, Error)]
pub enum SvsiError {
    /// A CSV cell could not be parsed. Line numbers are 1-based and include
    /// the header row.
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    /// Sample times are non-increasing, non-uniform, or two series do not
    /// share the same sample grid.
    #[error("grid error: {0}")]
    Grid(String),

    /// The event timeline is inconsistent or falls outside the sampled span.
    #[error("timeline error: {0}")]
    Timeline(String),

    /// Sample values violate the voltage domain (non-finite or non-positive).
    #[error("sample error: {0}")]
    Samples(String),

    /// Normalization was requested on an already-normalized trace.
    #[error("trace is already normalized")]
    AlreadyNormalized,

    /// An analysis window is empty or degenerate.
    #[error("window error: {0}")]
    Window(String),

    /// The pre-fault reference voltage is zero or negative (normalization
    /// would divide by it).
    #[error("degenerate base: pre-fault reference voltage {0} is not positive")]
    DegenerateBase(f64),

    /// The trace ends before the recovered/unrecovered diagnostic window.
    #[error(
        "insufficient horizon: t_end = {t_end} s but classification requires \
         at least {required} s"
    )]
    InsufficientHorizon { t_end: f64, required: f64 },

    /// A synthetic waveform spec violates a family invariant.
    #[error("invalid waveform spec: {0}")]
    Spec(String),

    /// The waveform family does not admit analytic ground truth.
    #[error("unsupported spec for oracle evaluation: {0}")]
    UnsupportedSpec(String),

    /// A placement study manifest is incomplete or a cell failed.
    #[error("study error ({contingency}, {location}, {bus}): {reason}")]
    Study {
        contingency: String,
        location: String,
        bus: String,
        reason: String,
    },

    /// Invalid analysis configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SvsiError>;
