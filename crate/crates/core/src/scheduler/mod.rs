//! Daemons, the step engine, exhaustive enumeration and round accounting.

mod daemon;
mod engine;
mod enumerate;
mod rounds;

pub use daemon::{DaemonParseError, DaemonStrategy, Selection, MAX_RESAMPLES};
pub use engine::{run_execution, Limits, RunError, StopOn};
pub use enumerate::{enumerate_executions, EnumerationBounds, ExecutionEnumerator};
pub use rounds::{boundaries_from, enabled_flags, round_boundaries, round_boundaries_from, rounds_to_reach};
