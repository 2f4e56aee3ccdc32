use thiserror::Error;

/// Harness failures, split by the exit status they map to.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => EXIT_USAGE,
            HarnessError::Solver(_) | HarnessError::Io(_) => EXIT_SOLVER,
        }
    }
}

impl From<dgpmg::Error> for HarnessError {
    fn from(e: dgpmg::Error) -> Self {
        HarnessError::Solver(e.to_string())
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}
