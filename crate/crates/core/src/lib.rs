//! Exact-arithmetic hitting-set generators for read-once oblivious algebraic
//! branching programs (ROABPs), commutative ROABPs, set-multilinear ABPs and
//! diagonal circuits, together with the rank-condenser machinery they rest on
//! and a brute-force verification harness that certifies every construction
//! at desk scale.
//!
//! Everything is computed over a prime field with a word-sized modulus; there
//! is no floating point and no tolerance anywhere.

pub mod field;
pub mod generators;
pub mod linalg;
pub mod models;
pub mod pit;
pub mod poly;
pub mod rank;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("elements belong to different fields ({0} vs {1})")]
    FieldMismatch(u64, u64),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("division or inversion by zero")]
    DivisionByZero,
    #[error("interpolation points are not distinct")]
    DuplicatePoints,
    #[error("term budget exceeded (cap {0}); set PIT_TERM_BUDGET to raise it")]
    BudgetExceeded(usize),
    #[error("field of size {p} too small: need at least {need}")]
    FieldTooSmall { p: u64, need: u64 },
    #[error("individual degree {got} violates the bound {bound}")]
    DegreeTooLarge { got: u32, bound: u32 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Default cap on the number of terms any exhaustive expansion may produce.
pub const DEFAULT_TERM_BUDGET: usize = 2_000_000;

/// Expansion cap, honoring the `PIT_TERM_BUDGET` override.
pub fn term_budget() -> usize {
    std::env::var("PIT_TERM_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_TERM_BUDGET)
}

/// Floor of the base-2 logarithm, with `floor_lg(1) = 0`.
///
/// Computed via bit length, never through floating point: bounds like
/// `floor(lg r^2)` sit in theorem preconditions where an off-by-one is fatal.
pub fn floor_lg(n: u64) -> u32 {
    assert!(n >= 1, "floor_lg of zero");
    63 - n.leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_lg_values() {
        assert_eq!(floor_lg(1), 0);
        assert_eq!(floor_lg(2), 1);
        assert_eq!(floor_lg(3), 1);
        assert_eq!(floor_lg(4), 2);
        assert_eq!(floor_lg(1023), 9);
        assert_eq!(floor_lg(1024), 10);
    }
}
