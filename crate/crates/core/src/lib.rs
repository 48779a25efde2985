//! Exact and numerical tools for base-q digital sequences: q-multiplicative,
//! q-semimultiplicative and q-quasimultiplicative phases, the cancellation
//! functional λ, Möbius and bilinear correlations, and constructive
//! detectors of almost periodic structure.

mod cyclotomic;
pub mod detect;
pub mod digits;
pub mod error;
pub mod lambda;
pub mod phase;
pub mod seq;
pub mod sieve;

pub use error::{Error, Result};
pub use phase::Phase;
pub use seq::{ClassTag, CoefficientTable, DigitalSequence};
