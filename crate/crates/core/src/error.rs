use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input file not found: {}", .0.display())]
    FileMissing(PathBuf),

    #[error("{}: expected header `{expected}`, found `{found}`", path.display())]
    FormatError {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("{}: {malformed} of {total} rows are malformed (limit is 10%)", path.display())]
    ExcessiveMalformedRows {
        path: PathBuf,
        malformed: usize,
        total: usize,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("invalid synthetic corpus parameters: {0}")]
    InvalidParams(String),

    #[error("corpus too large for the brute-force oracle: {authors} authors, {tweeters} tweeters (limit {limit} each)")]
    CorpusTooLarge {
        authors: usize,
        tweeters: usize,
        limit: usize,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}

/// A DOI that is empty or does not start with `10.` once normalized.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid DOI: {0:?}")]
pub struct InvalidDoi(pub String);

/// A name with no tokens left after normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("name is empty after normalization")]
pub struct EmptyName;
