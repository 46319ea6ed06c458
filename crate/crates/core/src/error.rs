use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Every failure the core can report.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    EmptyInput,
    InvalidProbability(f64),
    /// Shapes given as `(rows, cols)`; vectors use `cols = 1`.
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    ZeroDimension(&'static str),
    EmptyBatch,
    DivergentInference,
    EnumerationTooLarge {
        units: usize,
        limit: usize,
    },
    InstanceTooLarge {
        devices: usize,
        limit: usize,
    },
    ConstantSignal,
    SeriesTooShort {
        len: usize,
        window: usize,
    },
    TooFewSamples(usize),
    UndefinedNee,
    InvalidConfig(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyInput => write!(f, "empty input"),
            Error::InvalidProbability(p) => write!(f, "invalid probability {p}"),
            Error::DimensionMismatch { op, left, right } => write!(
                f,
                "dimension mismatch in {op}: {}x{} vs {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Error::ZeroDimension(what) => write!(f, "zero dimension: {what}"),
            Error::EmptyBatch => write!(f, "empty batch"),
            Error::DivergentInference => write!(f, "divergent inference"),
            Error::EnumerationTooLarge { units, limit } => {
                write!(f, "enumeration too large: {units} binary units (limit {limit})")
            }
            Error::InstanceTooLarge { devices, limit } => write!(
                f,
                "instance too large for exhaustive CO: {devices} devices (limit {limit})"
            ),
            Error::ConstantSignal => write!(f, "constant signal"),
            Error::SeriesTooShort { len, window } => {
                write!(f, "series of length {len} is shorter than one window of {window}")
            }
            Error::TooFewSamples(n) => write!(f, "need at least 3 samples to split, got {n}"),
            Error::UndefinedNee => write!(f, "undefined NEE (zero denominator)"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

#[cfg(any(test, feature = "std"))]
impl std::error::Error for Error {}
