//! A computational laboratory for lacunary sequences: exact dilated orbits
//! {n_k x}, discrepancy and pair-correlation statistics, GCD sums and
//! Diophantine solution counting, dilation variances, and a seeded Monte
//! Carlo harness for central limit theorems and variance-mixture limits.

pub mod bigfrac;
pub mod dilated;
pub mod diophantine;
pub mod error;
pub(crate) mod fixexp;
pub mod mclab;
pub mod normality;
pub mod numeric;
pub mod pointstats;
pub mod quad;
pub mod seqgen;

pub use error::{Error, Result};
