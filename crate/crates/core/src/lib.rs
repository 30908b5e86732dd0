//! Simulation and verification of self-stabilizing asynchronous unison.
//!
//! Nodes hold a `(status, clock)` pair and run a prioritized rule set under a
//! daemon. Executions are recorded as replayable traces and checked against
//! the structural invariants and exact move and round budgets of the
//! algorithm. A synchronizer layer runs synchronous algorithms on top of the
//! unison clocks.

pub mod campaign;
pub mod clock;
pub mod config;
pub mod explore;
pub mod protocol;
pub mod rules;
pub mod scheduler;
pub mod synchronizer;
pub mod topology;
pub mod trace;
pub mod verifier;

pub use clock::{Clock, NodeState, Period, PeriodError, Status};
pub use config::Configuration;
pub use protocol::{AuxPredicate, HasUnison, NeighborView, Protocol, Unison};
pub use rules::Rule;
pub use topology::{NodeId, Topology};
pub use trace::{Termination, Trace};
