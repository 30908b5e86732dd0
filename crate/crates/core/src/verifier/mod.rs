//! Configuration classes, structural diagnostics and trace oracles.

mod checks;
mod classify;
mod interval;
mod paths;
mod report;
mod segments;

pub use checks::{
    check_bounds, check_bounds_configs, check_invariants, check_invariants_configs, check_liveness, config_violations, e_path_violation,
    first_clean_index, liveness_violation, replay, step_violations, summarize, verify_trace,
};
pub use classify::{classify_configuration, is_almost_clean, is_clean, is_root_at, roots_of, CharacterizationMismatch, ConfigClass};
pub use interval::{color_interval, find_hole, ClockInterval};
pub use paths::{d_path_membership, find_e_path, is_e_path, EPathError};
pub use report::{Report, TraceSummary, VerificationReport, VerificationStatus, Violation, ViolationKind};
pub use segments::{
    decompose_configs, move_census, segment_decomposition, MoveCensus, NodeMoves, RootCreationDetected, Segment,
    SegmentDecomposition,
};
