use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration value is out of its allowed range.
    Config(String),
    /// A loaded world violates one of its structural invariants.
    InvalidWorld(String),
    /// The object does not occur in any image of the requested subset.
    AbsentObject { object: usize },
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    InvalidLevel(i64),
    DuplicateRecord { user: usize, object: usize },
    EmptyRecords,
    EmptyMask,
    /// A log term would be non-positive (capacity must exceed 1 K).
    Domain(String),
    Infeasible {
        budget: f64,
        required: f64,
        deficit: f64,
    },
    SearchSpaceTooLarge { combinations: f64 },
    /// No non-empty image subset could be drawn for the user.
    SparsifyExhausted { user: usize, attempts: u32 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::InvalidWorld(msg) => write!(f, "invalid world: {msg}"),
            Error::AbsentObject { object } => {
                write!(f, "object {object} does not appear in the image subset")
            }
            Error::IndexOutOfRange { what, index, len } => {
                write!(f, "{what} index {index} out of range (size {len})")
            }
            Error::InvalidLevel(level) => {
                write!(f, "attention level {level} outside 1..=5")
            }
            Error::DuplicateRecord { user, object } => {
                write!(f, "duplicate record for user {user}, object {object}")
            }
            Error::EmptyRecords => write!(f, "no attention records to fit"),
            Error::EmptyMask => write!(f, "evaluation mask is empty"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Infeasible {
                budget,
                required,
                deficit,
            } => write!(
                f,
                "infeasible allocation: budget {budget} K is below the {required} K needed for floors (deficit {deficit} K)"
            ),
            Error::SearchSpaceTooLarge { combinations } => {
                write!(f, "brute-force search space too large ({combinations:.3e} grid points)")
            }
            Error::SparsifyExhausted { user, attempts } => write!(
                f,
                "could not draw a non-empty image subset for user {user} after {attempts} attempts"
            ),
        }
    }
}

impl core::error::Error for Error {}
