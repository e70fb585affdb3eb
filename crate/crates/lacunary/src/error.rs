//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A sequence specification is malformed or its parameters are out of range.
    #[error("invalid sequence spec: {0}")]
    InvalidSpec(String),

    /// A floor of a transcendental quantity could not be decided at the
    /// precision cap; the caller may raise the cap.
    #[error("near-integer ambiguity at term {index}: undecidable at {bits} fraction bits")]
    NearIntegerAmbiguity { index: usize, bits: u32 },

    /// The fixed-point sample does not carry enough bits for the requested
    /// orbit: every {n x} consumes bitlength(n) leading bits of x.
    #[error("insufficient precision: need {required} bits, have {actual}")]
    InsufficientPrecision { required: u64, actual: u64 },

    /// A counting problem exceeds the documented memory/time budget.
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),

    /// A digit stream ended before the requested prefix was produced.
    #[error("digit stream exhausted: needed {needed} digits, got {got}")]
    StreamExhausted { needed: usize, got: usize },

    /// An orbit run would require more working precision than the budget allows.
    #[error("precision overflow: {0} bits requested, cap is {1}")]
    PrecisionOverflow(u64, u64),

    /// weber_bound_check: a frequency lies outside the stated interval.
    #[error("interval violation: {value} outside [e^{r}, e^{}]", r + 1)]
    IntervalViolation { value: u64, r: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
