use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: bad magic number 0x{found:08x} (expected 0x{expected:08x})")]
    Format {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("inconsistent inputs: {0}")]
    Consistency(String),

    #[error("{path}: length error: {detail}")]
    Length { path: PathBuf, detail: String },

    #[error("label out of range: {0}")]
    Range(String),

    #[error("line {line}: parse error: {detail}")]
    Parse { line: usize, detail: String },

    #[error("line {line}: shape error: expected {expected} values, found {found}")]
    Shape {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("curve fit did not converge after {iterations} iterations (residual {residual:e})")]
    Calibration { iterations: usize, residual: f64 },

    #[error("non-finite coordinate during layout optimization at epoch {epoch}")]
    NonFinite { epoch: usize },

    #[error("class {class}: {detail}")]
    Geometry { class: usize, detail: String },

    #[error("exclusion would empty class {class} ({size} samples)")]
    EmptiesClass { class: usize, size: usize },

    #[error("provenance mismatch: manifest built for {expected:016x}, dataset is {found:016x}")]
    Provenance { expected: u64, found: u64 },

    #[error("degenerate point set: {0}")]
    Degenerate(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("experiment cell {cell} failed: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
