use thiserror::Error;

/// Errors raised by state constructors, measurement validation and the
/// scenario-specific evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside its allowed range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state is not normalized: squared norm {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },
    #[error("measurement vectors are not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("behavior table invalid: {0}")]
    InvalidBehavior(String),
    #[error("scenario shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("probability {value} outside [0, 1]")]
    InvalidProbability { value: f64 },
    #[error("settings give CHSH = {chsh}, no Bell violation so no finite critical efficiency")]
    NoViolation { chsh: f64 },
    #[error("polytope of {count} vertices exceeds the enumeration guard of {limit}")]
    SizeGuard { count: u128, limit: u128 },
    #[error("state is not of the form cos(t)|00> + sin(t)|11>")]
    NotThetaState,
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
