use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid dimensions or spacing outside the supported range.
    InvalidGrid { width: usize, height: usize, spacing: f64 },
    /// Value buffer length does not match `width * height`.
    LengthMismatch { expected: usize, actual: usize },
    /// A NaN or infinite value was supplied or produced.
    NonFinite { what: &'static str },
    /// Two fields that must share a grid do not.
    GridMismatch,
    /// A parameter violates its invariant. `key` uses the dotted configuration name.
    InvalidParameter { key: &'static str, message: String },
    /// Explicit time step above the stability limit, or a step whose update exceeded the
    /// a-priori bound.
    Cfl { dt: f64, limit: f64 },
    /// The Hamiltonian and the direction lemma are singular at `p = 0`.
    ZeroVector,
    /// `Y ⪯ X` was required but `X − Y` has a negative eigenvalue.
    NotOrdered { min_eigenvalue: f64 },
    /// A level-set operation needs both signs and found only one.
    NoInterface,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid { width, height, spacing } => write!(
                f,
                "invalid grid {width}x{height} with spacing {spacing}: need width, height >= 3 and spacing > 0"
            ),
            Error::LengthMismatch { expected, actual } => {
                write!(f, "expected {expected} values, got {actual}")
            }
            Error::NonFinite { what } => write!(f, "non-finite value in {what}"),
            Error::GridMismatch => f.write_str("fields are defined on different grids"),
            Error::InvalidParameter { key, message } => write!(f, "{key}: {message}"),
            Error::Cfl { dt, limit } => {
                write!(f, "CFL violation: dt = {dt} exceeds the stability limit {limit}")
            }
            Error::ZeroVector => f.write_str("p = 0 is a singular point"),
            Error::NotOrdered { min_eigenvalue } => {
                write!(f, "Y <= X does not hold: X - Y has eigenvalue {min_eigenvalue}")
            }
            Error::NoInterface => f.write_str("field has no sign change"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(key: &'static str, message: impl Into<String>) -> Error {
    Error::InvalidParameter { key, message: message.into() }
}
