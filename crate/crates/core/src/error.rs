use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("invalid quantum strategy: {0}")]
    InvalidSpec(String),

    #[error(
        "commutation violation: alice (x={x}, a={a}) and bob (y={y}, b={b}) have commutator norm {residual:e}"
    )]
    Commutation {
        x: usize,
        a: usize,
        y: usize,
        b: usize,
        residual: f64,
    },

    #[error("{what}: {count} exceeds cap {cap}{hint}")]
    CapExceeded {
        what: &'static str,
        count: u128,
        cap: u128,
        hint: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix {index} has operator norm {norm} > 1")]
    OperatorNorm { index: usize, norm: f64 },

    #[error("square root of an indefinite matrix (min eigenvalue {0:e})")]
    Indefinite(f64),

    #[error("defect {defect:e} exceeds repair limit {limit}")]
    DefectTooLarge { defect: f64, limit: f64 },

    #[error("invalid machine: {0}")]
    Machine(String),

    #[error("cannot step a halted configuration")]
    Halted,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
