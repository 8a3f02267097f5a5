use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A query point lies outside the grid's hyper-rectangle.
    #[error("point {point:?} lies outside the domain [{lo:?}, {hi:?}]")]
    OutOfDomain {
        point: Vec<f64>,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },

    #[error("point #{index} of batch: {source}")]
    BatchPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("index {index:?} out of range for {nodes} nodes per axis")]
    IndexOutOfRange { index: Vec<usize>, nodes: usize },

    #[error("no sign change on bracket [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("level {level} outside the value range [{min}, {max}]")]
    Range { level: f64, min: f64, max: f64 },

    #[error("group (treated={treated}, period={period}) has no observations or zero total weight")]
    EmptyGroup { treated: u8, period: u8 },

    #[error("data row {row}: {message}")]
    Data { row: usize, message: String },

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("population truth is only available for designs with delta = 0 (got {delta})")]
    UnsupportedTruth { delta: f64 },

    #[error("replication {index}: {source}")]
    Replication {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used to map failures onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numeric,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config { .. } => ErrorKind::Usage,
            Error::Data { .. }
            | Error::EmptyGroup { .. }
            | Error::Csv(_)
            | Error::Json(_)
            | Error::Io(_) => ErrorKind::Data,
            Error::Replication { source, .. } | Error::BatchPoint { source, .. } => source.kind(),
            _ => ErrorKind::Numeric,
        }
    }
}
