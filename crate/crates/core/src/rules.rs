//! Guards, priorities, and actions of the four unison rules.
//!
//! Every predicate here reads the node's own state and the multiset of its
//! neighbors' states; nothing else.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::{Clock, NodeState, Period, Status};
use crate::protocol::NeighborView;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("state {state} is outside the Pairs domain for B = {period}")]
pub struct DomainViolation {
    pub state: NodeState,
    pub period: i32,
}

/// A fired or enabled rule. The `R_P(i)` family is collapsed to the
/// highest-priority member, carrying its target clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    RR,
    RP(Clock),
    RC,
    RU,
}

impl Rule {
    pub fn is_error_rule(self) -> bool {
        matches!(self, Rule::RR | Rule::RP(_))
    }

    pub fn label(self) -> &'static str {
        match self {
            Rule::RR => "RR",
            Rule::RP(_) => "RP",
            Rule::RC => "RC",
            Rule::RU => "RU",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::RP(i) => write!(f, "RP({i})"),
            other => f.write_str(other.label()),
        }
    }
}

pub fn is_root(own: NodeState, nbrs: &NeighborView<NodeState>, period: Period) -> bool {
    match own.status {
        Status::E => !nbrs.iter().any(|q| q.is_error() && q.clock < own.clock),
        Status::C => nbrs
            .iter()
            .any(|q| own.clock < q.clock && period.dist(q.clock, own.clock) >= 2),
    }
}

pub fn is_active_root(own: NodeState, nbrs: &NeighborView<NodeState>, period: Period) -> bool {
    is_root(own, nbrs, period) && (own.clock != period.floor() || own.is_correct())
}

/// Smallest `i` with `errorPropag(p, i)`, i.e. some erroneous neighbor `q`
/// has `q.c < i < p.c`. That is `1 + min q.c` over erroneous neighbors with
/// `q.c <= p.c - 2`.
///
/// The action writes `(E, i)`, so only targets inside the erroneous clock
/// range `[-B, 0)` are admitted: a neighbor at `(E, -1)` never propagates.
pub fn error_propagation_target(own: NodeState, nbrs: &NeighborView<NodeState>) -> Option<Clock> {
    nbrs.iter()
        .filter(|q| q.is_error() && q.clock <= own.clock - 2 && q.clock <= -2)
        .map(|q| q.clock + 1)
        .min()
}

pub fn can_clear_error(own: NodeState, nbrs: &NeighborView<NodeState>) -> bool {
    own.is_error()
        && nbrs.iter().all(|q| {
            (own.clock - 1..=own.clock + 1).contains(&q.clock)
                && (q.clock != own.clock + 1 || q.is_correct())
        })
}

pub fn is_unison_move(own: NodeState, nbrs: &NeighborView<NodeState>, period: Period) -> bool {
    let next = period.increment(own.clock);
    own.is_correct() && nbrs.iter().all(|q| q.clock == own.clock || q.clock == next)
}

pub fn has_successor_neighbor(own: NodeState, nbrs: &NeighborView<NodeState>, period: Period) -> bool {
    let next = period.increment(own.clock);
    nbrs.iter().any(|q| q.clock == next)
}

/// True when `R_R` or some `R_P(i)` is enabled.
pub fn error_rule_enabled(own: NodeState, nbrs: &NeighborView<NodeState>, period: Period) -> bool {
    is_active_root(own, nbrs, period) || error_propagation_target(own, nbrs).is_some()
}

/// Highest-priority enabled rule. `aux` is only evaluated when it can decide
/// the outcome (the `R_U` guard with no successor neighbor).
pub fn enabled_rule_with(
    own: NodeState,
    nbrs: &NeighborView<NodeState>,
    period: Period,
    aux: impl FnOnce() -> bool,
) -> Option<Rule> {
    if is_active_root(own, nbrs, period) {
        return Some(Rule::RR);
    }
    if let Some(target) = error_propagation_target(own, nbrs) {
        return Some(Rule::RP(target));
    }
    if can_clear_error(own, nbrs) {
        return Some(Rule::RC);
    }
    if is_unison_move(own, nbrs, period) && (has_successor_neighbor(own, nbrs, period) || aux()) {
        return Some(Rule::RU);
    }
    None
}

/// Domain-checked version of [`enabled_rule_with`] for a fixed `P_aux` value.
pub fn enabled_rule(
    own: NodeState,
    nbrs: &NeighborView<NodeState>,
    period: Period,
    aux: bool,
) -> Result<Option<Rule>, DomainViolation> {
    for s in std::iter::once(&own).chain(nbrs.iter()) {
        if !s.in_domain(period) {
            return Err(DomainViolation {
                state: *s,
                period: period.get(),
            });
        }
    }
    Ok(enabled_rule_with(own, nbrs, period, || aux))
}

pub fn apply_rule(own: NodeState, rule: Rule, period: Period) -> NodeState {
    match rule {
        Rule::RR => NodeState::error(period.floor()),
        Rule::RP(target) => NodeState::error(target),
        Rule::RC => NodeState::correct(own.clock),
        Rule::RU => NodeState::correct(period.increment(own.clock)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view(states: &[NodeState]) -> NeighborView<NodeState> {
        NeighborView::new(states.to_vec())
    }

    fn b(x: i32) -> Period {
        Period::new(x).unwrap()
    }

    /// Literal evaluation of every guard, the whole `R_P(i)` family
    /// enumerated, priorities applied afterwards.
    fn brute_force_rule(own: NodeState, nbrs: &[NodeState], period: Period, aux: bool) -> Option<Rule> {
        let bb = period.get();
        let exists = |f: &dyn Fn(&NodeState) -> bool| nbrs.iter().any(f);
        let forall = |f: &dyn Fn(&NodeState) -> bool| nbrs.iter().all(f);
        let dist = |x: i32, y: i32| period.dist(x, y);
        let inc = |x: i32| period.increment(x);
        let root = (own.status == Status::E
            && !exists(&|q| q.status == Status::E && q.clock < own.clock))
            || (own.status == Status::C && exists(&|q| own.clock < q.clock && dist(q.clock, own.clock) >= 2));
        let active_root = root && (own.clock != -bb || own.status == Status::C);
        let mut propag: Vec<i32> = (-bb..0)
            .filter(|&i| exists(&|q| q.status == Status::E && q.clock < i && i < own.clock))
            .collect();
        propag.sort();
        let clear = own.status == Status::E
            && forall(&|q| {
                [own.clock - 1, own.clock, own.clock + 1].contains(&q.clock)
                    && (q.clock != own.clock + 1 || q.status == Status::C)
            });
        let unison = own.status == Status::C && forall(&|q| q.clock == own.clock || q.clock == inc(own.clock));
        let ru = unison && (aux || exists(&|q| q.clock == inc(own.clock)));
        if active_root {
            Some(Rule::RR)
        } else if let Some(&i) = propag.first() {
            Some(Rule::RP(i))
        } else if clear {
            Some(Rule::RC)
        } else if ru {
            Some(Rule::RU)
        } else {
            None
        }
    }

    #[test]
    fn spec_examples() {
        let all_floor = vec![NodeState::correct(-8); 2];
        assert_eq!(
            enabled_rule(NodeState::correct(-8), &view(&all_floor), b(8), true),
            Ok(Some(Rule::RU))
        );
        assert_eq!(
            enabled_rule(NodeState::error(-6), &view(&[]), b(6), true),
            Ok(Some(Rule::RC))
        );
        assert_eq!(
            enabled_rule(NodeState::correct(3), &view(&[NodeState::error(-6)]), b(6), true),
            Ok(Some(Rule::RP(-5)))
        );
        assert_eq!(
            enabled_rule(NodeState::correct(0), &view(&[NodeState::correct(2)]), b(8), true),
            Ok(Some(Rule::RR))
        );
        assert_eq!(
            brute_force_rule(NodeState::correct(3), &[NodeState::error(-6)], b(6), true),
            Some(Rule::RP(-5))
        );
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(enabled_rule(NodeState::error(0), &view(&[]), b(6), true).is_err());
        assert!(enabled_rule(NodeState::correct(0), &view(&[NodeState::correct(6)]), b(6), true).is_err());
    }

    #[test]
    fn actions() {
        assert_eq!(apply_rule(NodeState::correct(0), Rule::RR, b(8)), NodeState::error(-8));
        assert_eq!(apply_rule(NodeState::error(-6), Rule::RC, b(6)), NodeState::correct(-6));
        assert_eq!(apply_rule(NodeState::correct(7), Rule::RU, b(8)), NodeState::correct(0));
        assert_eq!(apply_rule(NodeState::correct(3), Rule::RP(-5), b(6)), NodeState::error(-5));
    }

    #[test]
    fn clear_and_unison_are_exclusive() {
        let period = b(4);
        let states: Vec<_> = NodeState::all(period).collect();
        for &own in &states {
            for &x in &states {
                for &y in &states {
                    let v = view(&[x, y]);
                    assert!(!(can_clear_error(own, &v) && is_unison_move(own, &v, period)));
                }
            }
        }
    }

    #[test]
    fn collapsed_rules_match_brute_force_two_neighbors() {
        let period = b(4);
        let states: Vec<_> = NodeState::all(period).collect();
        for &own in &states {
            for (k, &x) in states.iter().enumerate() {
                for &y in &states[k..] {
                    for aux in [false, true] {
                        let got = enabled_rule(own, &view(&[x, y]), period, aux).unwrap();
                        assert_eq!(got, brute_force_rule(own, &[x, y], period, aux), "{own} {x} {y}");
                        if let Some(rule) = got {
                            assert!(apply_rule(own, rule, period).in_domain(period));
                        }
                    }
                }
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn collapsed_rules_match_brute_force(
            bb in 4i32..10,
            own_idx in 0usize..1000,
            nbr_idx in proptest::collection::vec(0usize..1000, 0..5),
            aux: bool,
        ) {
            let period = b(bb);
            let states: Vec<_> = NodeState::all(period).collect();
            let own = states[own_idx % states.len()];
            let nbrs: Vec<_> = nbr_idx.iter().map(|i| states[i % states.len()]).collect();
            let got = enabled_rule(own, &view(&nbrs), period, aux).unwrap();
            proptest::prop_assert_eq!(got, brute_force_rule(own, &nbrs, period, aux));
            if let Some(rule) = got {
                proptest::prop_assert!(apply_rule(own, rule, period).in_domain(period));
                if let Rule::RP(i) = rule {
                    proptest::prop_assert!(i < own.clock);
                    proptest::prop_assert!((-bb + 1..=-1).contains(&i));
                }
            }
        }
    }
}
