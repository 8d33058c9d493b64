use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the simulator core.
///
/// Configuration problems are separated from runtime aborts so that callers
/// can map them onto distinct exit statuses.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    /// The pre-code needs more output nodes than the network has.
    PrecodeTooLarge { m: usize, n: usize },
    /// Blocks of different lengths were combined.
    LengthMismatch { expected: usize, found: usize },
    /// A node with no neighbours was asked to forward a packet.
    IsolatedNode(usize),
    /// Timing statistics do not support an estimate yet.
    EstimateUnavailable,
    /// A phase exceeded its round budget.
    Aborted { phase: &'static str, rounds: u64 },
}

impl Error {
    pub(crate) const fn invalid(name: &'static str, reason: &'static str) -> Self {
        Error::InvalidParameter { name, reason }
    }

    /// True for errors that describe an unusable configuration rather than
    /// a simulation that ran out of budget.
    pub fn is_config_error(&self) -> bool {
        !matches!(self, Error::Aborted { .. })
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::PrecodeTooLarge { m, n } => {
                write!(f, "pre-code needs m = {m} output nodes but the network has n = {n}")
            }
            Error::LengthMismatch { expected, found } => {
                write!(f, "block length mismatch: expected {expected}, found {found}")
            }
            Error::IsolatedNode(u) => write!(f, "node {u} has no neighbours"),
            Error::EstimateUnavailable => f.write_str("not enough visit data for an estimate"),
            Error::Aborted { phase, rounds } => {
                write!(f, "{phase} phase did not terminate within {rounds} rounds")
            }
        }
    }
}

impl core::error::Error for Error {}
