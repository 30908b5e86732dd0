use crate::synchronizer::sim::SimNodeState;
use crate::synchronizer::time::Time;

/// Simulated configurations read off a trace: `etas[t][p]` is `p.curr` at
/// the first configuration where `p` has time `t`. Only `t` reached by every
/// node is present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtaSequence<S> {
    pub etas: Vec<Vec<S>>,
    /// Largest time each node reached in the trace.
    pub max_times: Vec<Time>,
}

impl<S> EtaSequence<S> {
    /// First time not reached by every node. `Some(0)` means even the
    /// initial simulated configuration is incomplete.
    pub fn first_incomplete(&self) -> Time {
        self.etas.len() as Time
    }
}

/// Builds the sequence from configurations and their time assignments
/// (aligned, usually the suffix starting at the first clean configuration).
pub fn reconstruct_eta<S: Clone>(configs: &[&[SimNodeState<S>]], times: &[Vec<Time>]) -> EtaSequence<S> {
    debug_assert_eq!(configs.len(), times.len());
    let n = times.first().map_or(0, Vec::len);
    // per_node[p][t] for t >= 0
    let mut per_node: Vec<Vec<S>> = vec![Vec::new(); n];
    for (cfg, ts) in configs.iter().zip(times) {
        for p in 0..n {
            if ts[p] >= 0 && per_node[p].len() as Time == ts[p] {
                per_node[p].push(cfg[p].curr.clone());
            }
        }
    }
    let max_times = (0..n)
        .map(|p| times.iter().map(|ts| ts[p]).max().unwrap_or(0))
        .collect();
    let defined = per_node.iter().map(Vec::len).min().unwrap_or(0);
    let etas = (0..defined)
        .map(|t| per_node.iter().map(|states| states[t].clone()).collect())
        .collect();
    EtaSequence { etas, max_times }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::NodeState;

    fn s(c: i32, curr: i64) -> SimNodeState<i64> {
        SimNodeState::new(NodeState::correct(c), 0, curr)
    }

    #[test]
    fn silent_trace_gives_only_the_first_configuration() {
        let c = vec![s(0, 3), s(0, 3)];
        let eta = reconstruct_eta(&[c.as_slice()], &[vec![0, 0]]);
        assert_eq!(eta.etas, vec![vec![3, 3]]);
    }

    #[test]
    fn lagging_nodes_define_later_times() {
        let c0 = vec![s(-1, 9), s(0, 5)];
        let c1 = vec![s(0, 5), s(0, 5)];
        let c2 = vec![s(0, 5), s(1, 5)];
        let eta = reconstruct_eta(&[c0.as_slice(), c1.as_slice(), c2.as_slice()], &[vec![-1, 0], vec![0, 0], vec![0, 1]]);
        assert_eq!(eta.etas, vec![vec![5, 5]]);
        assert_eq!(eta.max_times, vec![0, 1]);
        assert_eq!(eta.first_incomplete(), 1);
    }
}
