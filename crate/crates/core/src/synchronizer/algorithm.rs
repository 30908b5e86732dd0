//! Synchronous input algorithms and their synchronous reference executor.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, RngCore};
use serde_json::{json, Value};
use thiserror::Error;

use crate::protocol::{neighbor_view, NeighborView};
use crate::topology::{NodeId, Topology};

/// Algorithm states as stored in `old` / `curr` and written to traces.
pub trait AlgState: Clone + Ord + fmt::Debug + Send + Sync {
    fn encode(&self) -> Value;
    fn decode(v: &Value) -> Result<Self, String>;
}

impl AlgState for i64 {
    fn encode(&self) -> Value {
        json!(self)
    }

    fn decode(v: &Value) -> Result<Self, String> {
        v.as_i64().ok_or_else(|| format!("expected an integer, got {v}"))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyncAlgError {
    #[error("identifier {0} is held by more than one node")]
    DuplicateIdentifiers(u32),
    #[error("node {node}: {msg}")]
    InvalidState { node: NodeId, msg: String },
}

/// A deterministic synchronous algorithm over anonymous neighbor multisets.
pub trait SyncAlgorithm: Send + Sync {
    type State: AlgState;

    /// Name written to the `alg` trace header field.
    fn name(&self) -> &'static str;

    fn transition(&self, own: &Self::State, nbrs: &NeighborView<Self::State>) -> Self::State;

    /// Arbitrary state for node `p`, used to corrupt `old` / `curr`.
    fn random_state(&self, p: NodeId, rng: &mut dyn RngCore) -> Self::State;

    fn validate(&self, _states: &[Self::State]) -> Result<(), SyncAlgError> {
        Ok(())
    }
}

/// Every node adopts the minimum value in its closed neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinPropagation {
    /// Random states are drawn from `0..value_range`.
    pub value_range: i64,
}

impl Default for MinPropagation {
    fn default() -> Self {
        Self { value_range: 100 }
    }
}

pub fn alg_min_propagation() -> MinPropagation {
    MinPropagation::default()
}

impl SyncAlgorithm for MinPropagation {
    type State = i64;

    fn name(&self) -> &'static str {
        "min-prop"
    }

    fn transition(&self, own: &i64, nbrs: &NeighborView<i64>) -> i64 {
        nbrs.iter().copied().fold(*own, i64::min)
    }

    fn random_state(&self, _p: NodeId, rng: &mut dyn RngCore) -> i64 {
        rng.gen_range(0..self.value_range)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BfsState {
    pub id: u32,
    pub leader: u32,
    pub dist: u32,
}

impl AlgState for BfsState {
    fn encode(&self) -> Value {
        json!([self.id, self.leader, self.dist])
    }

    fn decode(v: &Value) -> Result<Self, String> {
        let field = |i: usize| -> Result<u32, String> {
            v.get(i)
                .and_then(Value::as_u64)
                .and_then(|x| u32::try_from(x).ok())
                .ok_or_else(|| format!("expected [id, leader, dist], got {v}"))
        };
        match v.as_array().map(Vec::len) {
            Some(3) => Ok(BfsState {
                id: field(0)?,
                leader: field(1)?,
                dist: field(2)?,
            }),
            _ => Err(format!("expected [id, leader, dist], got {v}")),
        }
    }
}

/// Leader election on the minimum identifier with BFS layers.
///
/// Each node takes the lexicographically smallest `(leader, dist)` among
/// `(own id, 0)` and `(q.leader, q.dist + 1)` over neighbors `q`, keeping
/// only distances below `n`. The cap lets fake leaders die out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinIdBfs {
    pub n: usize,
}

pub fn alg_min_id_bfs(n: usize) -> MinIdBfs {
    MinIdBfs { n }
}

impl MinIdBfs {
    /// States with the given identifiers and the own-leader, zero-distance
    /// value everywhere.
    pub fn initial(ids: &[u32]) -> Vec<BfsState> {
        ids.iter().map(|&id| BfsState { id, leader: id, dist: 0 }).collect()
    }
}

impl SyncAlgorithm for MinIdBfs {
    type State = BfsState;

    fn name(&self) -> &'static str {
        "min-id-bfs"
    }

    fn transition(&self, own: &BfsState, nbrs: &NeighborView<BfsState>) -> BfsState {
        let cap = self.n.saturating_sub(1) as u32;
        let best = nbrs
            .iter()
            .filter(|q| q.dist < cap)
            .map(|q| (q.leader, q.dist + 1))
            .fold((own.id, 0), std::cmp::min);
        BfsState {
            id: own.id,
            leader: best.0,
            dist: best.1,
        }
    }

    /// Keeps identifier `p + 1`; corrupts leader (possibly fake, down to 0)
    /// and distance.
    fn random_state(&self, p: NodeId, rng: &mut dyn RngCore) -> BfsState {
        let n = self.n as u32;
        BfsState {
            id: p as u32 + 1,
            leader: rng.gen_range(0..=n),
            dist: rng.gen_range(0..n.max(1)),
        }
    }

    fn validate(&self, states: &[BfsState]) -> Result<(), SyncAlgError> {
        let mut seen = BTreeSet::new();
        for s in states {
            if !seen.insert(s.id) {
                return Err(SyncAlgError::DuplicateIdentifiers(s.id));
            }
        }
        Ok(())
    }
}

/// One synchronous round: every node applies the transition to the same
/// configuration.
pub fn sync_step<A: SyncAlgorithm>(alg: &A, t: &Topology, cfg: &[A::State]) -> Vec<A::State> {
    t.nodes().map(|p| alg.transition(&cfg[p], &neighbor_view(cfg, t, p))).collect()
}

pub fn sync_reference_run<A: SyncAlgorithm>(alg: &A, t: &Topology, eta0: &[A::State], steps: usize) -> Vec<Vec<A::State>> {
    let mut out = vec![eta0.to_vec()];
    for _ in 0..steps {
        let next = sync_step(alg, t, out.last().unwrap());
        out.push(next);
    }
    out
}

/// Smallest `k` such that the `k`-th synchronous configuration from `eta0`
/// is a fixpoint, searched up to `max_steps`.
pub fn stabilization_time<A: SyncAlgorithm>(alg: &A, t: &Topology, eta0: &[A::State], max_steps: usize) -> Option<usize> {
    let mut cur = eta0.to_vec();
    for k in 0..=max_steps {
        let next = sync_step(alg, t, &cur);
        if next == cur {
            return Some(k);
        }
        cur = next;
    }
    None
}
