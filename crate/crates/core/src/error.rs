use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing manifest in {0}")]
    MissingManifest(PathBuf),

    #[error("malformed manifest: {0}")]
    Manifest(String),

    #[error("bad PGM file {path}: {reason}")]
    Pgm { path: PathBuf, reason: String },

    #[error("frame {index} is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    DimensionMismatch {
        index: usize,
        got_w: usize,
        got_h: usize,
        want_w: usize,
        want_h: usize,
    },

    #[error("empty frame sequence")]
    EmptySequence,

    #[error("region file line {line}: {reason}")]
    RegionFile { line: usize, reason: String },

    #[error("ground truth: {0}")]
    GroundTruth(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("input too short: need at least {need} samples, got {got}")]
    TooShort { need: usize, got: usize },

    #[error("non-finite sample in input")]
    NonFinite,

    #[error("reference signal is zero")]
    ZeroReference,

    #[error("scene: {0}")]
    Scene(String),

    #[error("config: {0}")]
    Config(String),

    #[error("no trackable regions for the entire run")]
    NoTrackableRegions,

    #[error("time spans do not overlap enough: {0}")]
    SpanMismatch(String),
}

impl Error {
    /// Whether the run failed because nothing could be estimated, as opposed
    /// to bad input or usage.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::NoTrackableRegions)
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
