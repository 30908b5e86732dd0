use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::topology::NodeId;

/// Coin-flip rounds before a distributed-random step falls back to a
/// central-random pick.
pub const MAX_RESAMPLES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown daemon `{0}` (expected sync, central-random, dist-random:P, scripted:A|B|..., exhaustive)")]
pub struct DaemonParseError(pub String);

/// Selection policy. Every selection is a nonempty subset of the enabled set.
#[derive(Debug, Clone, PartialEq)]
pub enum DaemonStrategy {
    Synchronous,
    CentralRandom,
    DistributedRandom(f64),
    /// Fixed selections, one per step.
    Scripted(Vec<Vec<NodeId>>),
    /// Marks traces produced by exhaustive enumeration; never drives a run.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    Nodes(Vec<NodeId>),
    /// The script named a node that is not enabled (or an empty set).
    ScriptInvalid(Option<NodeId>),
    ScriptExhausted,
}

impl DaemonStrategy {
    /// `enabled` must be nonempty and sorted.
    pub fn select(&self, enabled: &[NodeId], step: usize, rng: &mut impl Rng) -> Selection {
        debug_assert!(!enabled.is_empty());
        match self {
            DaemonStrategy::Synchronous => Selection::Nodes(enabled.to_vec()),
            DaemonStrategy::CentralRandom => Selection::Nodes(vec![*enabled.choose(rng).unwrap()]),
            DaemonStrategy::DistributedRandom(p) => {
                for _ in 0..MAX_RESAMPLES {
                    let pick: Vec<_> = enabled.iter().copied().filter(|_| rng.gen_bool(*p)).collect();
                    if !pick.is_empty() {
                        return Selection::Nodes(pick);
                    }
                }
                Selection::Nodes(vec![*enabled.choose(rng).unwrap()])
            }
            DaemonStrategy::Scripted(script) => match script.get(step) {
                None => Selection::ScriptExhausted,
                Some(sel) if sel.is_empty() => Selection::ScriptInvalid(None),
                Some(sel) => match sel.iter().find(|p| enabled.binary_search(p).is_err()) {
                    Some(&p) => Selection::ScriptInvalid(Some(p)),
                    None => {
                        let mut s = sel.clone();
                        s.sort_unstable();
                        s.dedup();
                        Selection::Nodes(s)
                    }
                },
            },
            DaemonStrategy::Exhaustive => panic!("exhaustive daemon only drives enumerate_executions"),
        }
    }
}

impl fmt::Display for DaemonStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DaemonStrategy::Synchronous => f.write_str("sync"),
            DaemonStrategy::CentralRandom => f.write_str("central-random"),
            DaemonStrategy::DistributedRandom(p) => write!(f, "dist-random:{p}"),
            DaemonStrategy::Scripted(script) => {
                let parts: Vec<String> = script
                    .iter()
                    .map(|s| s.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(","))
                    .collect();
                write!(f, "scripted:{}", parts.join("|"))
            }
            DaemonStrategy::Exhaustive => f.write_str("exhaustive"),
        }
    }
}

impl FromStr for DaemonStrategy {
    type Err = DaemonParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DaemonParseError(s.to_string());
        match s {
            "sync" | "synchronous" => return Ok(DaemonStrategy::Synchronous),
            "central-random" => return Ok(DaemonStrategy::CentralRandom),
            "exhaustive" => return Ok(DaemonStrategy::Exhaustive),
            _ => {}
        }
        if let Some(p) = s.strip_prefix("dist-random:") {
            let p: f64 = p.parse().map_err(|_| bad())?;
            if !(p > 0.0 && p <= 1.0) {
                return Err(bad());
            }
            return Ok(DaemonStrategy::DistributedRandom(p));
        }
        if let Some(body) = s.strip_prefix("scripted:") {
            let script = body
                .split('|')
                .map(|step| {
                    step.split(',')
                        .filter(|x| !x.is_empty())
                        .map(|x| x.trim().parse::<NodeId>().map_err(|_| bad()))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(DaemonStrategy::Scripted(script));
        }
        Err(bad())
    }
}
