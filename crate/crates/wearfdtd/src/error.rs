use std::fmt;
use std::path::{Path, PathBuf};

use wearfdtd_core::Error as CoreError;

/// Process exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Other = 1,
    Input = 2,
    Capacity = 3,
    Numeric = 4,
    Validation = 5,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}", Located(path, *line, message))]
    Parse {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    /// Some placements of a study failed; the report for the rest was still written.
    #[error("{0}")]
    PartialStudy(String),
    #[error("cache entry {}: {message}", path.display())]
    Cache { path: PathBuf, message: String },
}

struct Located<'a>(&'a Path, Option<usize>, &'a str);

impl fmt::Display for Located<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.1 {
            Some(line) => write!(f, "{}:{line}: {}", self.0.display(), self.2),
            None => write!(f, "{}: {}", self.0.display(), self.2),
        }
    }
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn class(&self) -> ExitClass {
        match self {
            Error::Core(e) => match e {
                CoreError::Capacity { .. } => ExitClass::Capacity,
                CoreError::NumericalDivergence { .. } => ExitClass::Numeric,
                CoreError::Validation(_) => ExitClass::Validation,
                CoreError::InvalidArgument(_)
                | CoreError::GeometryConflict(_)
                | CoreError::UnknownTissue(_)
                | CoreError::Data(_) => ExitClass::Input,
                _ => ExitClass::Other,
            },
            Error::Parse { .. } | Error::Usage(_) => ExitClass::Input,
            Error::Io { .. } | Error::Cache { .. } | Error::PartialStudy(_) => ExitClass::Other,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class() as i32
    }
}

pub type Result<T> = std::result::Result<T, Error>;
