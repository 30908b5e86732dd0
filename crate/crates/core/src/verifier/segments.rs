use serde::Serialize;
use thiserror::Error;

use crate::clock::{Clock, NodeState, Period};
use crate::protocol::HasUnison;
use crate::rules::Rule;
use crate::topology::{NodeId, Topology};
use crate::trace::Trace;
use crate::verifier::classify::roots_of;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("node {node} is a root in configuration {config} but not in the one before")]
pub struct RootCreationDetected {
    pub config: usize,
    pub node: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    /// First and last configuration indices (inclusive).
    pub start: usize,
    pub end: usize,
    pub clean: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegmentDecomposition {
    /// Configuration indices where the root set strictly shrinks.
    pub boundaries: Vec<usize>,
    pub segments: Vec<Segment>,
    pub roots: Vec<Vec<NodeId>>,
}

impl SegmentDecomposition {
    /// Segment that contains the step leaving configuration `k`.
    pub fn segment_of_step(&self, k: usize) -> usize {
        self.boundaries.partition_point(|&r| r <= k)
    }
}

pub fn decompose_configs(
    configs: &[Vec<NodeState>],
    t: &Topology,
    period: Period,
) -> Result<SegmentDecomposition, RootCreationDetected> {
    let roots: Vec<Vec<NodeId>> = configs.iter().map(|c| roots_of(c, t, period)).collect();
    let mut boundaries = Vec::new();
    for i in 1..roots.len() {
        if let Some(&node) = roots[i].iter().find(|r| !roots[i - 1].contains(r)) {
            return Err(RootCreationDetected { config: i, node });
        }
        if roots[i].len() < roots[i - 1].len() {
            boundaries.push(i);
        }
    }
    let last = configs.len() - 1;
    let starts = std::iter::once(0).chain(boundaries.iter().copied());
    let ends = boundaries.iter().copied().chain(std::iter::once(last));
    let segments = starts
        .zip(ends)
        .map(|(start, end)| Segment {
            start,
            end,
            clean: roots[start].is_empty(),
        })
        .collect();
    Ok(SegmentDecomposition {
        boundaries,
        segments,
        roots,
    })
}

pub fn segment_decomposition<S: HasUnison>(trace: &Trace<S>) -> Result<SegmentDecomposition, RootCreationDetected> {
    decompose_configs(&trace.unison_configs(), trace.topology(), trace.period())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NodeMoves {
    pub r: usize,
    pub c: usize,
    pub u: usize,
    pub p: usize,
    pub rp_targets: Vec<Clock>,
    /// U-moves per segment, indexed like `SegmentDecomposition::segments`.
    pub u_by_segment: Vec<usize>,
}

impl NodeMoves {
    pub fn total(&self) -> usize {
        self.r + self.c + self.u + self.p
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MoveCensus {
    pub nodes: Vec<NodeMoves>,
}

impl MoveCensus {
    pub fn total(&self) -> usize {
        self.nodes.iter().map(NodeMoves::total).sum()
    }

    pub fn total_c(&self) -> usize {
        self.nodes.iter().map(|m| m.c).sum()
    }

    pub fn total_p(&self) -> usize {
        self.nodes.iter().map(|m| m.p).sum()
    }
}

pub fn move_census<S>(trace: &Trace<S>, segments: &SegmentDecomposition) -> MoveCensus {
    let n = trace.topology().n();
    let mut nodes = vec![
        NodeMoves {
            u_by_segment: vec![0; segments.segments.len()],
            ..NodeMoves::default()
        };
        n
    ];
    for step in &trace.steps {
        let seg = segments.segment_of_step(step.index);
        for &(p, rule) in &step.fired {
            let m = &mut nodes[p];
            match rule {
                Rule::RR => m.r += 1,
                Rule::RC => m.c += 1,
                Rule::RU => {
                    m.u += 1;
                    m.u_by_segment[seg] += 1;
                }
                Rule::RP(target) => {
                    m.p += 1;
                    m.rp_targets.push(target);
                }
            }
        }
    }
    MoveCensus { nodes }
}
