use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("classification target needs at least 2 classes, got {0}")]
    SingleClass(usize),

    #[error("class {class} of {num_classes} never occurs in the target")]
    EmptyClass { class: usize, num_classes: usize },

    #[error("class index {class} out of range for {num_classes} classes")]
    ClassOutOfRange { class: u32, num_classes: usize },

    #[error("precision must be positive (alpha = {alpha}, beta = {beta})")]
    NonPositivePrecision { alpha: f64, beta: f64 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("store has no [CLS] slot")]
    MissingClsSlot,

    #[error("sequence {sequence} has no subwords left after exclusions")]
    EmptyAfterExclusion { sequence: usize },

    #[error("invalid sequence layout: {0}")]
    InvalidLayout(String),

    #[error("sequence {sequence}: span [{start}, {end}) is invalid for a sequence of {len} subwords")]
    SpanOutOfBounds {
        sequence: usize,
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("sequence {sequence}: {spans} spans but {labels} labels")]
    LabelCountMismatch {
        sequence: usize,
        spans: usize,
        labels: usize,
    },

    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },

    #[error("unsupported format version {0}")]
    VersionUnsupported(u16),

    #[error("unsupported dtype tag {0}")]
    UnsupportedDtype(u8),

    #[error("truncated file: expected {expected} bytes, found {found}")]
    TruncatedFile { expected: u64, found: u64 },

    #[error("checksum mismatch: manifest {expected}, payload {actual}")]
    ChecksumMismatch { expected: String, actual: String },

    #[error("manifest field `{field}` disagrees with the data file ({manifest} vs {file})")]
    ManifestMismatch {
        field: &'static str,
        manifest: String,
        file: String,
    },

    #[error("tau_w = {0} is outside [-1, 1]")]
    OutOfRange(f64),

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("missing performance for: {}", .0.join(", "))]
    MissingPerformance(Vec<String>),

    #[error("duplicate model id `{0}`")]
    DuplicateModel(String),

    #[error("need at least {needed} entries, got {got}")]
    TooFewEntries { needed: usize, got: usize },

    #[error("csv: {0}")]
    Csv(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    /// Stable machine-readable code, used for the CLI's error JSON.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonFinite { .. } => "NonFinite",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::InvalidShape(_) => "InvalidShape",
            Error::SingleClass(_) => "SingleClass",
            Error::EmptyClass { .. } => "EmptyClass",
            Error::ClassOutOfRange { .. } => "ClassOutOfRange",
            Error::NonPositivePrecision { .. } => "NonPositivePrecision",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::MissingClsSlot => "MissingClsSlot",
            Error::EmptyAfterExclusion { .. } => "EmptyAfterExclusion",
            Error::InvalidLayout(_) => "InvalidLayout",
            Error::SpanOutOfBounds { .. } => "SpanOutOfBounds",
            Error::LabelCountMismatch { .. } => "LabelCountMismatch",
            Error::BadMagic { .. } => "BadMagic",
            Error::VersionUnsupported(_) => "VersionUnsupported",
            Error::UnsupportedDtype(_) => "UnsupportedDtype",
            Error::TruncatedFile { .. } => "TruncatedFile",
            Error::ChecksumMismatch { .. } => "ChecksumMismatch",
            Error::ManifestMismatch { .. } => "ManifestMismatch",
            Error::OutOfRange(_) => "OutOfRange",
            Error::ZeroVariance(_) => "ZeroVariance",
            Error::MissingPerformance(_) => "MissingPerformance",
            Error::DuplicateModel(_) => "DuplicateModel",
            Error::TooFewEntries { .. } => "TooFewEntries",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
            Error::Io(_) => "Io",
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
