//! Alphabets, sequences, the metric `d_c`, transition constraints and the
//! truncated shift space built from them.

mod alphabet;
mod constraint;
mod sequence;
mod space;

pub use alphabet::{Alphabet, MetricKind};
pub use constraint::{IntervalSet, SectionalTriviality, TransitionConstraint};
pub use sequence::{prefix_distance, sequence_distance, MetricConfig, TruncatedSequence};
pub use space::{Budget, PrefixTable, ShiftSpace};
