//! Whole-configuration semantics: neighbor views, enabled sets, and atomic
//! steps over any node-state type that embeds a unison variable.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::clock::{NodeState, Period};
use crate::rules::{self, Rule};
use crate::topology::{NodeId, Topology};

/// The multiset of a node's neighbor states.
///
/// States are kept sorted so that no port or identity information leaks
/// into guard evaluation; two views with the same multiset are equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborView<S> {
    states: Vec<S>,
}

impl<S: Ord> NeighborView<S> {
    pub fn new(mut states: Vec<S>) -> Self {
        states.sort();
        Self { states }
    }
}

impl<S> NeighborView<S> {
    pub fn iter(&self) -> std::slice::Iter<'_, S> {
        self.states.iter()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn multiplicity(&self, s: &S) -> usize
    where
        S: PartialEq,
    {
        self.states.iter().filter(|x| *x == s).count()
    }

    pub fn map<T: Ord>(&self, f: impl FnMut(&S) -> T) -> NeighborView<T> {
        NeighborView::new(self.states.iter().map(f).collect())
    }
}

/// Node states that carry a unison `(status, clock)` pair.
pub trait HasUnison {
    fn unison(&self) -> NodeState;
}

impl HasUnison for NodeState {
    fn unison(&self) -> NodeState {
        *self
    }
}

/// A prioritized-rule protocol layered on the unison rules: decides `P_aux`
/// and performs the action of a fired rule on the full node state.
pub trait Protocol: Sync {
    type State: Clone + Ord + fmt::Debug + HasUnison + Send + Sync;

    fn aux(&self, own: &Self::State, nbrs: &NeighborView<Self::State>) -> bool;

    fn fire(
        &self,
        own: &Self::State,
        nbrs: &NeighborView<Self::State>,
        rule: Rule,
        period: Period,
    ) -> Self::State;

    /// `paux` field written to trace headers.
    fn aux_label(&self) -> String;

    /// `alg` field written to trace headers.
    fn algorithm_label(&self) -> Option<String> {
        None
    }
}

pub type AuxFn = dyn Fn(&NodeState, &NeighborView<NodeState>) -> bool + Send + Sync;

/// `P_aux` for the plain unison.
#[derive(Clone)]
pub enum AuxPredicate {
    AlwaysTrue,
    AlwaysFalse,
    Custom(Arc<AuxFn>),
}

impl fmt::Debug for AuxPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuxPredicate::AlwaysTrue => "AlwaysTrue",
            AuxPredicate::AlwaysFalse => "AlwaysFalse",
            AuxPredicate::Custom(_) => "Custom",
        })
    }
}

/// The bare unison algorithm.
#[derive(Debug, Clone)]
pub struct Unison {
    pub aux: AuxPredicate,
}

impl Unison {
    pub fn greedy() -> Self {
        Self {
            aux: AuxPredicate::AlwaysTrue,
        }
    }

    pub fn with_aux(aux: AuxPredicate) -> Self {
        Self { aux }
    }
}

impl Protocol for Unison {
    type State = NodeState;

    fn aux(&self, own: &NodeState, nbrs: &NeighborView<NodeState>) -> bool {
        match &self.aux {
            AuxPredicate::AlwaysTrue => true,
            AuxPredicate::AlwaysFalse => false,
            AuxPredicate::Custom(f) => f(own, nbrs),
        }
    }

    fn fire(&self, own: &NodeState, _nbrs: &NeighborView<NodeState>, rule: Rule, period: Period) -> NodeState {
        rules::apply_rule(*own, rule, period)
    }

    fn aux_label(&self) -> String {
        match self.aux {
            AuxPredicate::AlwaysTrue => "true",
            AuxPredicate::AlwaysFalse => "false",
            AuxPredicate::Custom(_) => "custom",
        }
        .to_string()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("step selection is empty")]
    EmptySelection,
    #[error("node {0} is not enabled")]
    NodeNotEnabled(NodeId),
    #[error("node {0} selected more than once or out of range")]
    BadSelection(NodeId),
}

pub fn neighbor_view<S: Clone + Ord>(cfg: &[S], t: &Topology, p: NodeId) -> NeighborView<S> {
    NeighborView::new(t.neighbors(p).iter().map(|&q| cfg[q].clone()).collect())
}

/// Enabled rule of `p` together with its neighbor view (reused by `fire`).
pub fn node_rule<P: Protocol>(
    proto: &P,
    cfg: &[P::State],
    t: &Topology,
    period: Period,
    p: NodeId,
) -> (Option<Rule>, NeighborView<P::State>) {
    let view = neighbor_view(cfg, t, p);
    let unison_view = view.map(HasUnison::unison);
    let rule = rules::enabled_rule_with(cfg[p].unison(), &unison_view, period, || proto.aux(&cfg[p], &view));
    (rule, view)
}

pub fn enabled_rules<P: Protocol>(
    proto: &P,
    cfg: &[P::State],
    t: &Topology,
    period: Period,
) -> Vec<Option<Rule>> {
    t.nodes().map(|p| node_rule(proto, cfg, t, period, p).0).collect()
}

pub fn enabled_set<P: Protocol>(proto: &P, cfg: &[P::State], t: &Topology, period: Period) -> Vec<NodeId> {
    t.nodes()
        .filter(|&p| node_rule(proto, cfg, t, period, p).0.is_some())
        .collect()
}

/// One atomic step: every selected node evaluates its guards on `cfg`, then
/// all writes land together. Returns the successor and the fired rules in
/// selection order.
pub fn apply_step<P: Protocol>(
    proto: &P,
    cfg: &[P::State],
    t: &Topology,
    period: Period,
    selected: &[NodeId],
) -> Result<(Vec<P::State>, Vec<(NodeId, Rule)>), StepError> {
    if selected.is_empty() {
        return Err(StepError::EmptySelection);
    }
    let mut seen = vec![false; cfg.len()];
    let mut fired = Vec::with_capacity(selected.len());
    let mut writes = Vec::with_capacity(selected.len());
    for &p in selected {
        if p >= cfg.len() || seen[p] {
            return Err(StepError::BadSelection(p));
        }
        seen[p] = true;
        let (rule, view) = node_rule(proto, cfg, t, period, p);
        let rule = rule.ok_or(StepError::NodeNotEnabled(p))?;
        writes.push((p, proto.fire(&cfg[p], &view, rule, period)));
        fired.push((p, rule));
    }
    let mut next = cfg.to_vec();
    for (p, s) in writes {
        next[p] = s;
    }
    Ok((next, fired))
}
