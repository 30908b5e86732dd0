//! E-paths and D-paths: decreasing paths that end at an erroneous root.

use thiserror::Error;

use crate::clock::{NodeState, Period};
use crate::topology::{NodeId, Topology};
use crate::verifier::classify::is_root_at;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EPathError {
    #[error("node {0} is not in error")]
    NotInError(NodeId),
    #[error("descent from node {start} ended at non-root {end}")]
    InternalInvariantBroken { start: NodeId, end: NodeId },
}

/// Greedy descent from an erroneous node: keep stepping to the erroneous
/// neighbor with the smallest clock below the current one. The last node
/// must be a root.
pub fn find_e_path(cfg: &[NodeState], t: &Topology, period: Period, p: NodeId) -> Result<Vec<NodeId>, EPathError> {
    if !cfg[p].is_error() {
        return Err(EPathError::NotInError(p));
    }
    let mut path = vec![p];
    let mut cur = p;
    loop {
        let next = t
            .neighbors(cur)
            .iter()
            .copied()
            .filter(|&q| cfg[q].is_error() && cfg[q].clock < cfg[cur].clock)
            .min_by_key(|&q| (cfg[q].clock, q));
        match next {
            Some(q) => {
                path.push(q);
                cur = q;
            }
            None => break,
        }
    }
    if !is_root_at(cfg, t, period, cur) {
        return Err(EPathError::InternalInvariantBroken { start: p, end: cur });
    }
    Ok(path)
}

/// Whether `path` is an E-path: erroneous nodes along edges with strictly
/// decreasing clocks, ending at a root.
pub fn is_e_path(cfg: &[NodeState], t: &Topology, period: Period, path: &[NodeId]) -> bool {
    let Some(&end) = path.last() else {
        return false;
    };
    path.iter().all(|&q| cfg[q].is_error())
        && path
            .windows(2)
            .all(|w| t.neighbors(w[0]).contains(&w[1]) && cfg[w[1]].clock < cfg[w[0]].clock)
        && is_root_at(cfg, t, period, end)
}

/// Whether `p` is the first node of a D-path: a run of correct nodes whose
/// clocks drop by exactly one per hop, then a strict drop into an E-path.
pub fn d_path_membership(cfg: &[NodeState], t: &Topology, period: Period, p: NodeId) -> bool {
    if cfg[p].is_error() {
        return find_e_path(cfg, t, period, p).is_ok();
    }
    // Clocks strictly decrease along the search, so it terminates.
    t.neighbors(p).iter().any(|&q| {
        let lower = cfg[q].clock < cfg[p].clock;
        if !lower {
            return false;
        }
        if cfg[q].is_error() {
            find_e_path(cfg, t, period, q).is_ok()
        } else {
            cfg[q].clock == cfg[p].clock - 1 && d_path_membership(cfg, t, period, q)
        }
    })
}
