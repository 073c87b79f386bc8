use thiserror::Error;

/// Failures raised by the geometric, interpolation and energy routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("point-tangent pair is not proper: {0}")]
    ImproperPair(String),

    #[error("point-tangent pair is incompatible cocircular; no balanced matching point")]
    IncompatibleCocircular,

    #[error("smallness condition violated at segment {segment}: modulus {modulus:.6} >= 1/2")]
    Smallness { segment: usize, modulus: f64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the failure comes from bad input (as opposed to a numerical breakdown).
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Precondition(_) | Error::Parse(_))
    }

    /// Process exit status for the command line tool: 2 for bad input, 3 otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.is_input_error() {
            2
        } else {
            3
        }
    }
}
