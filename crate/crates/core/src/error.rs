//! Shared error type for construction and evaluation failures.

use std::fmt;

/// Failure modes surfaced by sequence construction, polynomial arithmetic,
/// and the approximation builders.
#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// An adjacent pair of modes violates the claimed ratio floor.
    RatioViolation {
        index: usize,
        lhs: i64,
        rhs: i64,
        ratio: String,
    },
    /// Integer arithmetic on frequencies would leave the 64-bit window.
    Overflow(String),
    /// An enumeration or expansion exceeds its combinatorial guard.
    TooLarge(String),
    /// A term-pair or sample budget was exhausted before completion.
    Budget(String),
    /// The sequence is not dissociate at the requested order.
    NotDissociate { order: i64, witness: i64 },
    /// A constructed approximant failed its pointwise sandwich check.
    SandwichFailure { at: f64, lo: f64, val: f64, hi: f64 },
    /// No admissible accuracy parameter was found within the search budget.
    NoAdmissibleEps { p: f64, tried: usize },
    /// An argument combination outside the operation's contract.
    InvalidArgument(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::RatioViolation {
                index,
                lhs,
                rhs,
                ratio,
            } => write!(
                f,
                "ratio floor {ratio} violated at index {index}: {lhs} -> {rhs}"
            ),
            Error::Overflow(what) => write!(f, "integer overflow: {what}"),
            Error::TooLarge(what) => write!(f, "enumeration too large: {what}"),
            Error::Budget(what) => write!(f, "budget exhausted: {what}"),
            Error::NotDissociate { order, witness } => write!(
                f,
                "sequence not dissociate at order {order}: frequency {witness} has two representations"
            ),
            Error::SandwichFailure { at, lo, val, hi } => write!(
                f,
                "sandwich failure at {at}: {val} outside [{lo}, {hi}]"
            ),
            Error::NoAdmissibleEps { p, tried } => write!(
                f,
                "no admissible accuracy parameter for p = {p} after {tried} attempts"
            ),
            Error::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
