//! Logical time of nodes from a clean configuration onward.

use std::collections::VecDeque;

use thiserror::Error;

use crate::clock::{NodeState, Period};
use crate::rules::Rule;
use crate::topology::{NodeId, Topology};
use crate::verifier::{color_interval, is_clean};

pub type Time = i64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TimeError {
    #[error("configuration is not clean")]
    NotClean,
    #[error("clock offsets around a cycle through node {0} do not sum to zero")]
    Inconsistent(NodeId),
}

/// Birth times of a clean configuration.
///
/// Along each edge the clock either repeats or advances by `+_B 1`, which
/// fixes the time offset between the endpoints (0 or 1). The offsets are
/// integrated by BFS from node 0 and shifted so the largest time is 0.
pub fn birth_times(cfg: &[NodeState], t: &Topology, period: Period) -> Result<Vec<Time>, TimeError> {
    if !is_clean(cfg, t, period) {
        return Err(TimeError::NotClean);
    }
    let offset = |p: NodeId, q: NodeId| -> Option<Time> {
        let (a, b) = (cfg[p].clock, cfg[q].clock);
        if a == b {
            Some(0)
        } else if period.increment(a) == b {
            Some(1)
        } else if period.increment(b) == a {
            Some(-1)
        } else {
            None
        }
    };
    let mut times: Vec<Option<Time>> = vec![None; t.n()];
    times[0] = Some(0);
    let mut queue = VecDeque::from([0]);
    while let Some(p) = queue.pop_front() {
        let tp = times[p].unwrap();
        for &q in t.neighbors(p) {
            let d = offset(p, q).ok_or(TimeError::Inconsistent(p))?;
            match times[q] {
                None => {
                    times[q] = Some(tp + d);
                    queue.push_back(q);
                }
                Some(tq) if tq != tp + d => return Err(TimeError::Inconsistent(q)),
                Some(_) => {}
            }
        }
    }
    let times: Vec<Time> = times.into_iter().map(|x| x.expect("topology is connected")).collect();
    let max = *times.iter().max().unwrap();
    Ok(times.into_iter().map(|x| x - max).collect())
}

/// Birth times through the clock interval `{c_min +_B i : i <= span}`:
/// `i - span` for the node's offset `i`. `None` when the clock set is not
/// such an interval.
pub fn birth_times_by_interval(cfg: &[NodeState], period: Period) -> Option<Vec<Time>> {
    let iv = color_interval(cfg, period)?;
    if !iv.exact {
        return None;
    }
    cfg.iter()
        .map(|s| {
            (0..=iv.span)
                .find(|&i| period.add(iv.c_min, i) == s.clock)
                .map(|i| i as Time - iv.span as Time)
        })
        .collect()
}

/// Times at every configuration of `configs[start..]`, given the fired
/// rules of each step: a node's time grows by one on each `R_U`.
pub fn time_series(
    configs: &[Vec<NodeState>],
    fired: &[&[(NodeId, Rule)]],
    start: usize,
    t: &Topology,
    period: Period,
) -> Result<Vec<Vec<Time>>, TimeError> {
    let mut cur = birth_times(&configs[start], t, period)?;
    let mut out = vec![cur.clone()];
    for step in &fired[start..] {
        for &(p, r) in step.iter() {
            if r == Rule::RU {
                cur[p] += 1;
            }
        }
        out.push(cur.clone());
    }
    Ok(out)
}
