use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::topology::NodeId;
use crate::trace::Termination;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    // Invariants.
    Replay,
    RootCreation,
    AlmostCleanClosure,
    CleanClosure,
    Hole,
    ColorInterval,
    EPath,
    RootClearing,
    Characterization,
    Liveness,
    NonTermination,
    SimulationMismatch,
    TimeAssignment,
    GreedyProgress,
    UnisonMoveMinimum,
    /// Two independent routes to the same quantity disagree.
    OracleDisagreement,
    // Bounds.
    RMoves,
    UMoves,
    PMoves,
    CMoves,
    RoundsToClean,
    ClockGrowth,
    LazyMoves,
    LazyTermination,
    LazyMaxTime,
    LazyNonNegativeTimes,
    LazyRoundsAfterNonNegative,
    LazyTotalRounds,
}

impl ViolationKind {
    pub fn is_bound(self) -> bool {
        self >= ViolationKind::RMoves
    }

    pub fn name(self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Configuration index, when the violation is tied to one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeId>,
    pub detail: String,
}

impl Violation {
    pub fn new(kind: ViolationKind, detail: impl Into<String>) -> Self {
        Self {
            kind,
            config: None,
            node: None,
            detail: detail.into(),
        }
    }

    pub fn at(mut self, config: usize) -> Self {
        self.config = Some(config);
        self
    }

    pub fn node(mut self, node: NodeId) -> Self {
        self.node = Some(node);
        self
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(c) = self.config {
            write!(f, " @config {c}")?;
        }
        if let Some(p) = self.node {
            write!(f, " node {p}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Report {
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    pub fn merge(&mut self, other: Report) {
        self.violations.extend(other.violations);
    }

    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.count(kind) > 0
    }

    pub fn counts(&self) -> BTreeMap<ViolationKind, usize> {
        let mut m = BTreeMap::new();
        for v in &self.violations {
            *m.entry(v.kind).or_insert(0) += 1;
        }
        m
    }

    pub fn split(self) -> (Report, Report) {
        let (bounds, invariants): (Vec<_>, Vec<_>) = self.violations.into_iter().partition(|v| v.kind.is_bound());
        (Report { violations: invariants }, Report { violations: bounds })
    }
}

impl FromIterator<Violation> for Report {
    fn from_iter<I: IntoIterator<Item = Violation>>(iter: I) -> Self {
        Report {
            violations: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerificationStatus {
    Ok,
    InvariantViolation,
    BoundViolation,
}

impl VerificationStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            VerificationStatus::Ok => 0,
            VerificationStatus::InvariantViolation => 1,
            VerificationStatus::BoundViolation => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceSummary {
    pub n: usize,
    #[serde(rename = "B")]
    pub period: i32,
    #[serde(rename = "D")]
    pub diameter: usize,
    pub steps: usize,
    pub moves: usize,
    pub r_moves: usize,
    pub p_moves: usize,
    pub c_moves: usize,
    pub u_moves: usize,
    pub rounds: usize,
    pub first_clean: Option<usize>,
    pub rounds_to_clean: Option<usize>,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub invariants: Vec<Violation>,
    pub bounds: Vec<Violation>,
    pub status: VerificationStatus,
    pub summary: TraceSummary,
}

impl VerificationReport {
    pub fn new(report: Report, summary: TraceSummary) -> Self {
        let (invariants, bounds) = report.split();
        let status = if !invariants.is_ok() {
            VerificationStatus::InvariantViolation
        } else if !bounds.is_ok() {
            VerificationStatus::BoundViolation
        } else {
            VerificationStatus::Ok
        };
        Self {
            invariants: invariants.violations,
            bounds: bounds.violations,
            status,
            summary,
        }
    }

    /// Adds further violations and recomputes the status.
    pub fn extend(&mut self, more: Report) {
        let mut all: Report = self.invariants.drain(..).chain(self.bounds.drain(..)).collect();
        all.merge(more);
        *self = VerificationReport::new(all, self.summary.clone());
    }

    pub fn all(&self) -> impl Iterator<Item = &Violation> {
        self.invariants.iter().chain(&self.bounds)
    }
}
