use thiserror::Error;

/// Every failure mode of the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point outside the domain of {operator}: {detail}")]
    Domain {
        operator: &'static str,
        detail: String,
    },

    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    #[error("linear system (I + lambda A) could not be solved")]
    SingularSystem,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid value set: {0}")]
    InvalidValueSet(String),

    #[error("step {n} exceeds the schedule horizon {horizon}")]
    HorizonExceeded { n: usize, horizon: usize },

    #[error("invalid parameter schedule: {0}")]
    InvalidSchedule(String),

    #[error("quantitative data rejected: {0}")]
    InvalidQuantitativeData(String),

    #[error("invalid problem instance: {0}")]
    InvalidInstance(String),

    #[error("modulus table queried at {index}, valid range is {range}")]
    TableRange { index: String, range: String },

    #[error("exponent must be nonnegative")]
    NegativeExponent,

    #[error("invalid rational literal `{0}`")]
    InvalidRational(String),

    #[error("no grid point of the ball lies at distance >= {eps} from the zero set")]
    EmptyGrid { eps: f64 },

    #[error("infimum of |F| over the region at eps = {eps} is zero; no regularity value exists")]
    ZeroInfimum { eps: f64 },

    #[error("problem instance carries no known solutions")]
    MissingSolutions,

    #[error("residuals never drop below 1/(k+1) for k = {k}")]
    ResidualFloor { k: u64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("required modulus `{0}` was not supplied")]
    MissingModulus(&'static str),

    #[error("value does not fit the machine index type: {0}")]
    IndexOverflow(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
