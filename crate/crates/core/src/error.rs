use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("truncated box header at offset {offset}: need {needed} bytes, {available} available")]
    TruncatedHeader {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("invalid box size {size} at offset {offset}")]
    InvalidBoxSize { offset: usize, size: u64 },
    #[error("input is not an ISO-BMFF file: {0}")]
    NotIsoBmff(String),

    #[error("malformed metadata string {text:?}: {reason}")]
    MalformedMetadataString { text: String, reason: &'static str },
    #[error("malformed escape sequence in {0:?}")]
    MalformedEscape(String),

    #[error("empty corpus")]
    EmptyCorpus,
    #[error("vocabulary is empty")]
    EmptyVocabulary,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid cluster count {alpha} for {features} features")]
    InvalidClusterCount { alpha: usize, features: usize },

    #[error("need at least two classes, found {0}")]
    DegenerateLabels(usize),
    #[error("within-class scatter is singular and no ridge was configured")]
    SingularScatter,
    #[error("model has no training points")]
    EmptyModel,
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("label lists differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("class {label:?} has {count} sample(s); stratified split needs at least 2")]
    ClassTooSmall { label: String, count: usize },
    #[error("unknown device model id {0:?}")]
    UnknownDeviceId(String),
    #[error("leave-one-model-out needs at least two device models, found {0}")]
    NotEnoughModels(usize),
    #[error("no usable folds: {0}")]
    NoFolds(String),

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
    #[error("manifest: {0}")]
    Manifest(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the input data rather than by this program.
    pub fn is_data_error(&self) -> bool {
        !matches!(
            self,
            Error::SingularScatter
                | Error::DimensionMismatch { .. }
                | Error::InvalidClusterCount { .. }
                | Error::EmptyModel
        )
    }
}
