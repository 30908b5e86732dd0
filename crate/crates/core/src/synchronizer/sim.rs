use std::fmt;
use std::str::FromStr;

use serde_json::Value;

use crate::clock::{NodeState, Period};
use crate::protocol::{HasUnison, NeighborView, Protocol};
use crate::rules::{self, DomainViolation, Rule};
use crate::synchronizer::algorithm::{AlgState, SyncAlgorithm};
use crate::trace::{unison_from_json, TraceState};

/// Unison pair plus the last two simulated states.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimNodeState<S> {
    pub unison: NodeState,
    pub old: S,
    pub curr: S,
}

impl<S> SimNodeState<S> {
    pub fn new(unison: NodeState, old: S, curr: S) -> Self {
        Self { unison, old, curr }
    }
}

impl<S> HasUnison for SimNodeState<S> {
    fn unison(&self) -> NodeState {
        self.unison
    }
}

impl<S: AlgState> TraceState for SimNodeState<S> {
    fn to_json(&self) -> Value {
        Value::Array(vec![
            Value::from(self.unison.status.to_string()),
            Value::from(self.unison.clock),
            self.old.encode(),
            self.curr.encode(),
        ])
    }

    fn from_json(v: &Value) -> Result<Self, String> {
        let arr = v.as_array().ok_or("node state must be an array")?;
        if arr.len() != 4 {
            return Err(format!("expected [status, clock, old, curr], got {v}"));
        }
        Ok(SimNodeState {
            unison: unison_from_json(arr)?,
            old: S::decode(&arr[2])?,
            curr: S::decode(&arr[3])?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `P_aux` always true: clocks never stop.
    Greedy,
    /// `P_aux` holds when the simulated step would change `curr`.
    Lazy,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Greedy => "greedy",
            Mode::Lazy => "lazy",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "greedy" => Ok(Mode::Greedy),
            "lazy" => Ok(Mode::Lazy),
            other => Err(format!("unknown mode `{other}` (expected greedy or lazy)")),
        }
    }
}

/// A synchronous algorithm driven by the unison clocks.
#[derive(Debug, Clone)]
pub struct Synchronizer<A> {
    pub alg: A,
    pub mode: Mode,
}

impl<A: SyncAlgorithm> Synchronizer<A> {
    pub fn new(alg: A, mode: Mode) -> Self {
        Self { alg, mode }
    }

    /// The simulated next state of `own`: each neighbor contributes `curr`
    /// when it shares `own`'s clock and `old` otherwise.
    pub fn next_state(&self, own: &SimNodeState<A::State>, nbrs: &NeighborView<SimNodeState<A::State>>) -> A::State {
        let snapshot = nbrs.map(|q| {
            if q.unison.clock == own.unison.clock {
                q.curr.clone()
            } else {
                q.old.clone()
            }
        });
        self.alg.transition(&own.curr, &snapshot)
    }
}

impl<A: SyncAlgorithm> Protocol for Synchronizer<A> {
    type State = SimNodeState<A::State>;

    fn aux(&self, own: &Self::State, nbrs: &NeighborView<Self::State>) -> bool {
        match self.mode {
            Mode::Greedy => true,
            Mode::Lazy => self.next_state(own, nbrs) != own.curr,
        }
    }

    fn fire(&self, own: &Self::State, nbrs: &NeighborView<Self::State>, rule: Rule, period: Period) -> Self::State {
        let unison = rules::apply_rule(own.unison, rule, period);
        match rule {
            Rule::RU => SimNodeState {
                unison,
                old: own.curr.clone(),
                curr: self.next_state(own, nbrs),
            },
            _ => SimNodeState {
                unison,
                old: own.old.clone(),
                curr: own.curr.clone(),
            },
        }
    }

    fn aux_label(&self) -> String {
        self.mode.to_string()
    }

    fn algorithm_label(&self) -> Option<String> {
        Some(self.alg.name().to_string())
    }
}

/// Successor of one node under the modified rule set, or `None` if it is
/// disabled.
pub fn sim_enabled_and_apply<A: SyncAlgorithm>(
    sync: &Synchronizer<A>,
    own: &SimNodeState<A::State>,
    nbrs: &NeighborView<SimNodeState<A::State>>,
    period: Period,
) -> Result<Option<SimNodeState<A::State>>, DomainViolation> {
    let unison_view = nbrs.map(HasUnison::unison);
    let aux = sync.aux(own, nbrs);
    let rule = rules::enabled_rule(own.unison, &unison_view, period, aux)?;
    Ok(rule.map(|r| sync.fire(own, nbrs, r, period)))
}
