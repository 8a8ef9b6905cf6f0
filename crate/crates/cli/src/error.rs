use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{origin}:{line}:{column}: parse error: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{origin}:{line}: invalid `{field}`: {message}")]
    Range {
        origin: String,
        line: usize,
        field: String,
        message: String,
    },
    #[error("grid has {points} points, above the cap of {cap}")]
    GridTooLarge { points: usize, cap: usize },
    #[error("cutoff {cutoff} too small for {experiment}, need at least {required}")]
    CutoffTooSmall {
        experiment: String,
        cutoff: usize,
        required: usize,
    },
    #[error("cannot read {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Setup(#[from] homsim::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl CliError {
    /// 2 for anything wrong with the request, 1 for I/O on the output side.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Write { .. } | CliError::Pool(_) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
