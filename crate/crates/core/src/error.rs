use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed image: {0}")]
    MalformedImage(String),

    #[error("unsupported PGM maxval {0} (must be 1..=255)")]
    UnsupportedMaxval(u32),

    #[error("image width {width} is smaller than the over-segmentation divisor {n}")]
    WidthBelowDivisor { width: usize, n: usize },

    #[error("image has no foreground pixels")]
    EmptyImage,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty training data")]
    EmptyData,

    #[error("requested {centers} RBF centers but only {rows} training rows")]
    TooManyCenters { centers: usize, rows: usize },

    #[error("series length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),

    #[error("singular linear system")]
    SingularSystem,

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error("paths {left} and {right} cross at row {row}")]
    CrossingPaths { left: usize, right: usize, row: usize },

    #[error("corpus: {0}")]
    Corpus(String),

    #[error("word {word_id}: image {path} not found")]
    MissingImage { word_id: String, path: PathBuf },

    #[error("no labeled cuts to export")]
    NoLabels,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
