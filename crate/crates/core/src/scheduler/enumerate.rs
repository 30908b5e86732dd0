//! Depth-first enumeration of every daemon choice from one initial
//! configuration. Meant for tiny instances (n <= 4, small B).

use crate::clock::Period;
use crate::protocol::{apply_step, enabled_set, HasUnison, Protocol};
use crate::scheduler::daemon::DaemonStrategy;
use crate::scheduler::engine::{check_inputs, RunError, StopOn};
use crate::topology::{NodeId, Topology};
use crate::trace::{StepRecord, Termination, Trace, TraceHeader};
use crate::verifier::is_clean;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBounds {
    pub max_depth: usize,
    /// Cap on the number of steps expanded across the whole enumeration.
    pub max_visited: usize,
}

struct Frame<S> {
    cfg: Vec<S>,
    enabled: Vec<NodeId>,
    next_mask: u64,
}

/// Streams every maximal execution (up to the bounds). Every nonempty subset
/// of the enabled set is a distinct branch; a configuration repeating along
/// the current path ends that path with [`Termination::CycleDetected`].
pub struct ExecutionEnumerator<'a, P: Protocol> {
    proto: &'a P,
    topology: &'a Topology,
    period: Period,
    stop_on: StopOn,
    bounds: EnumerationBounds,
    header: TraceHeader,
    init: Vec<P::State>,
    stack: Vec<Frame<P::State>>,
    steps: Vec<StepRecord<P::State>>,
    visited: usize,
    exceeded: bool,
    started: bool,
}

pub fn enumerate_executions<'a, P: Protocol>(
    proto: &'a P,
    topology: &'a Topology,
    period: Period,
    init: Vec<P::State>,
    stop_on: StopOn,
    bounds: EnumerationBounds,
) -> Result<ExecutionEnumerator<'a, P>, RunError> {
    check_inputs(topology, period, &init)?;
    assert!(topology.n() < 64, "enumeration supports fewer than 64 nodes");
    let header = TraceHeader {
        topology: topology.clone(),
        period,
        daemon: DaemonStrategy::Exhaustive,
        aux: proto.aux_label(),
        seed: 0,
        algorithm: proto.algorithm_label(),
    };
    Ok(ExecutionEnumerator {
        proto,
        topology,
        period,
        stop_on,
        bounds,
        header,
        init,
        stack: Vec::new(),
        steps: Vec::new(),
        visited: 0,
        exceeded: false,
        started: false,
    })
}

impl<'a, P: Protocol> ExecutionEnumerator<'a, P> {
    /// True once a bound cut the enumeration short (truncated paths or an
    /// exhausted visit budget).
    pub fn bounds_exceeded(&self) -> bool {
        self.exceeded
    }

    pub fn visited(&self) -> usize {
        self.visited
    }

    fn leaf_reason(&mut self, cfg: &[P::State], enabled: &[NodeId], depth: usize) -> Option<Termination> {
        if enabled.is_empty() {
            return Some(Termination::Terminal);
        }
        if self.stop_on == StopOn::Clean {
            let unison: Vec<_> = cfg.iter().map(HasUnison::unison).collect();
            if is_clean(&unison, self.topology, self.period) {
                return Some(Termination::CleanReachedAndStopped);
            }
        }
        if depth >= self.bounds.max_depth {
            self.exceeded = true;
            return Some(Termination::StepLimit);
        }
        None
    }

    fn emit(&self, termination: Termination) -> Trace<P::State> {
        Trace {
            header: self.header.clone(),
            init: self.init.clone(),
            steps: self.steps.clone(),
            termination,
        }
    }
}

impl<'a, P: Protocol> Iterator for ExecutionEnumerator<'a, P> {
    type Item = Trace<P::State>;

    fn next(&mut self) -> Option<Self::Item> {
        if !self.started {
            self.started = true;
            let cfg = self.init.clone();
            let enabled = enabled_set(self.proto, &cfg, self.topology, self.period);
            if let Some(reason) = self.leaf_reason(&cfg, &enabled, 0) {
                return Some(self.emit(reason));
            }
            self.stack.push(Frame {
                cfg,
                enabled,
                next_mask: 1,
            });
        }
        loop {
            let top = self.stack.last_mut()?;
            let k = top.enabled.len();
            if top.next_mask >= 1u64 << k {
                self.stack.pop();
                self.steps.pop();
                continue;
            }
            if self.visited >= self.bounds.max_visited {
                self.exceeded = true;
                self.stack.clear();
                return None;
            }
            let mask = top.next_mask;
            top.next_mask += 1;
            let selected: Vec<NodeId> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| top.enabled[i]).collect();
            let (next, fired) = apply_step(self.proto, &top.cfg, self.topology, self.period, &selected)
                .expect("subsets of the enabled set are valid selections");
            self.visited += 1;
            let index = self.steps.len();
            let repeated = self.stack.iter().any(|f| f.cfg == next);
            self.steps.push(StepRecord {
                index,
                selected,
                fired,
                post: next.clone(),
            });
            let reason = if repeated {
                Some(Termination::CycleDetected)
            } else {
                let enabled = enabled_set(self.proto, &next, self.topology, self.period);
                match self.leaf_reason(&next, &enabled, index + 1) {
                    Some(r) => Some(r),
                    None => {
                        self.stack.push(Frame {
                            cfg: next,
                            enabled,
                            next_mask: 1,
                        });
                        None
                    }
                }
            };
            if let Some(reason) = reason {
                let trace = self.emit(reason);
                self.steps.pop();
                return Some(trace);
            }
        }
    }
}
