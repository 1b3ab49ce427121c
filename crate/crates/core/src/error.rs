use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the model, theory, simulation and statistics routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    Domain(&'static str),
    /// A simulation or model configuration violates its invariants.
    Config(&'static str),
    /// Invalid use of an API, e.g. empty input or a missing recorded path.
    Usage(&'static str),
    /// Detailed balance is undefined at the boundary state (λ+ = 0).
    Boundary,
    /// β ≤ 1: the free energy has a single minimum at zero.
    NoDoubleWell,
    /// A linear system could not be solved (zero pivot).
    Singular,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Usage(msg) => write!(f, "usage error: {msg}"),
            Error::Boundary => f.write_str("boundary state: upward rate vanishes"),
            Error::NoDoubleWell => {
                f.write_str("no double well: no spontaneous magnetization for beta <= 1")
            }
            Error::Singular => f.write_str("singular tridiagonal system"),
        }
    }
}

impl core::error::Error for Error {}
