use serde::Serialize;
use thiserror::Error;

use crate::clock::{NodeState, Period};
use crate::protocol::neighbor_view;
use crate::rules::{self, Rule};
use crate::topology::{NodeId, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ConfigClass {
    Clean,
    AlmostCleanNotClean,
    Dirty,
}

impl ConfigClass {
    pub fn is_almost_clean(self) -> bool {
        self != ConfigClass::Dirty
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("root-based class {by_definition:?} disagrees with rule-based class {by_rules:?}")]
pub struct CharacterizationMismatch {
    pub by_definition: ConfigClass,
    pub by_rules: ConfigClass,
}

pub fn is_root_at(cfg: &[NodeState], t: &Topology, period: Period, p: NodeId) -> bool {
    rules::is_root(cfg[p], &neighbor_view(cfg, t, p), period)
}

pub fn roots_of(cfg: &[NodeState], t: &Topology, period: Period) -> Vec<NodeId> {
    t.nodes().filter(|&p| is_root_at(cfg, t, period, p)).collect()
}

pub fn is_clean(cfg: &[NodeState], t: &Topology, period: Period) -> bool {
    !t.nodes().any(|p| is_root_at(cfg, t, period, p))
}

/// Every root is `(E, -B)` and every edge joins clocks at distance at most 1.
pub fn is_almost_clean(cfg: &[NodeState], t: &Topology, period: Period) -> bool {
    let roots_ok = roots_of(cfg, t, period)
        .into_iter()
        .all(|r| cfg[r] == NodeState::error(period.floor()));
    roots_ok
        && t
            .edges()
            .iter()
            .all(|&(p, q)| period.dist(cfg[p].clock, cfg[q].clock) <= 1)
}

fn class_by_definition(cfg: &[NodeState], t: &Topology, period: Period) -> ConfigClass {
    if is_clean(cfg, t, period) {
        ConfigClass::Clean
    } else if is_almost_clean(cfg, t, period) {
        ConfigClass::AlmostCleanNotClean
    } else {
        ConfigClass::Dirty
    }
}

/// Class derived only from which rules are enabled: no error rule means
/// almost clean, nothing but `R_U` means clean.
fn class_by_rules(cfg: &[NodeState], t: &Topology, period: Period) -> ConfigClass {
    let mut only_unison = true;
    for p in t.nodes() {
        let view = neighbor_view(cfg, t, p);
        match rules::enabled_rule_with(cfg[p], &view, period, || true) {
            Some(r) if r.is_error_rule() => return ConfigClass::Dirty,
            Some(Rule::RC) => only_unison = false,
            _ => {}
        }
    }
    if only_unison {
        ConfigClass::Clean
    } else {
        ConfigClass::AlmostCleanNotClean
    }
}

/// Classifies through both characterizations and fails if they disagree.
pub fn classify_configuration(
    cfg: &[NodeState],
    t: &Topology,
    period: Period,
) -> Result<ConfigClass, CharacterizationMismatch> {
    let by_definition = class_by_definition(cfg, t, period);
    let by_rules = class_by_rules(cfg, t, period);
    if by_definition == by_rules {
        Ok(by_definition)
    } else {
        Err(CharacterizationMismatch { by_definition, by_rules })
    }
}
