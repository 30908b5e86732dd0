//! Running synchronous algorithms on top of the unison clocks.
//!
//! Each node keeps its last two simulated states. When it increments its
//! clock it computes the next simulated state from the neighbors' `curr`
//! (same clock) or `old` (one tick ahead) values.

mod algorithm;
mod checks;
mod eta;
mod sim;
mod time;

pub use algorithm::{
    alg_min_id_bfs, alg_min_propagation, stabilization_time, sync_reference_run, sync_step, AlgState, BfsState, MinIdBfs,
    MinPropagation, SyncAlgError, SyncAlgorithm,
};
pub use checks::{
    analyze, check_greedy_progress, check_lazy_bounds, check_simulation_equivalence, check_time_invariants,
    measured_stabilization, verify_sim_trace, LazyStats, SimAnalysis, SimSummary, MAX_SYNC_ROUNDS,
};
pub use eta::{reconstruct_eta, EtaSequence};
pub use sim::{sim_enabled_and_apply, Mode, SimNodeState, Synchronizer};
pub use time::{birth_times, birth_times_by_interval, time_series, Time, TimeError};
