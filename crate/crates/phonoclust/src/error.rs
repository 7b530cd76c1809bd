use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

/// A problem with an input or output file, located by path and (when known) line.
#[derive(Debug)]
pub struct DataError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl DataError {
    pub fn new(path: impl AsRef<Path>, message: impl fmt::Display) -> Self {
        Self {
            path: path.as_ref().to_path_buf(),
            line: None,
            message: message.to_string(),
        }
    }

    pub fn at_line(path: impl AsRef<Path>, line: usize, message: impl fmt::Display) -> Self {
        Self {
            line: Some(line),
            ..Self::new(path, message)
        }
    }

    pub fn io(path: impl AsRef<Path>, err: io::Error) -> Self {
        Self::new(path, err)
    }

    /// Uses the line reported by serde_json, if any.
    pub fn json(path: impl AsRef<Path>, err: serde_json::Error) -> Self {
        match err.line() {
            0 => Self::new(path, err),
            line => Self::at_line(path, line, err),
        }
    }
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.path.display(), line, self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

impl std::error::Error for DataError {}
