//! Digital sequences: coefficient tables, evaluation, algebra and class checks.

mod sequence;
pub mod spec;
mod table;
mod verify;

pub use sequence::{ceil_log, ClassTag, DigitalSequence, PhaseBuffer};
pub use table::{CoefficientTable, EXACT_DEN_LIMIT, MAX_WINDOWS};
pub use verify::{
    reconstruct_check, reconstruct_check_with_gap, verify_class, ClassReport, Violation, MAX_STORED_VIOLATIONS,
    MAX_VERIFY_N,
};
