//! Verification campaigns: many independent runs, each verified inline.

mod parallel;
mod sync;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clock::{NodeState, Period};
use crate::config::{all_configurations, random_configuration};
use crate::explore::{explore_state_space, ExhaustiveOutcome};
use crate::protocol::{AuxPredicate, Protocol, Unison};
use crate::rules::Rule;
use crate::scheduler::{enumerate_executions, run_execution, DaemonStrategy, EnumerationBounds, Limits, StopOn};
use crate::topology::{GraphKind, Topology};
use crate::trace::{StepRecord, Termination, Trace};
use crate::verifier::{verify_trace, Report, VerificationStatus, Violation, ViolationKind as K};

pub use parallel::{map_parallel, map_sequential, thread_cap, Execution, THREADS_ENV};
pub use sync::{run_sync_cell, sync_campaign, sync_cells, AlgChoice, Start, SyncCell, SyncCellResult};

/// Sampled graph families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Path,
    Ring,
    Star,
    Complete,
    Random,
}

impl Family {
    pub const SAMPLED: [Family; 4] = [Family::Path, Family::Ring, Family::Star, Family::Random];

    /// Generator for `n` nodes. Random graphs get `n - 1 + n/2` edges,
    /// capped at the complete graph; rings need three nodes and fall back
    /// to paths below that.
    pub fn kind(self, n: usize) -> GraphKind {
        match self {
            Family::Path => GraphKind::Path(n),
            Family::Ring if n >= 3 => GraphKind::Ring(n),
            Family::Ring => GraphKind::Path(n),
            Family::Star => GraphKind::Star(n),
            Family::Complete => GraphKind::Complete(n),
            Family::Random => GraphKind::RandomConnected {
                n,
                m: (n - 1 + n / 2).min(n * (n - 1) / 2),
            },
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Path => "path",
            Family::Ring => "ring",
            Family::Star => "star",
            Family::Complete => "complete",
            Family::Random => "random",
        })
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "path" => Ok(Family::Path),
            "ring" => Ok(Family::Ring),
            "star" => Ok(Family::Star),
            "complete" => Ok(Family::Complete),
            "random" => Ok(Family::Random),
            _ => Err(format!("unknown graph family `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodPolicy {
    /// `max(4, 2D + 2)`.
    Auto,
    Fixed(i32),
}

impl PeriodPolicy {
    pub fn resolve(self, t: &Topology) -> Result<Period, crate::clock::PeriodError> {
        match self {
            PeriodPolicy::Auto => Ok(Period::auto(t)),
            PeriodPolicy::Fixed(b) => Period::for_topology(b, t),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CampaignSpec {
    pub families: Vec<Family>,
    pub n_min: usize,
    pub n_max: usize,
    pub daemons: Vec<DaemonStrategy>,
    pub seeds_per_cell: usize,
    pub period: PeriodPolicy,
    /// Explore every connected graph with at most `exhaustive_max_n` nodes
    /// (at most three).
    pub exhaustive: bool,
    pub exhaustive_max_n: usize,
    /// Depth of the path enumeration cross-check on graphs with at most two nodes.
    pub enumeration_depth: usize,
    pub base_seed: u64,
    /// Corrupt every trace before verification (negative control).
    pub inject_fault: bool,
}

impl CampaignSpec {
    /// Path, ring, star and random graphs on 4 to 8 nodes under the
    /// synchronous, central and distributed random daemons, 500 seeds per
    /// cell, plus the exhaustive part.
    pub fn standard() -> Self {
        Self {
            families: Family::SAMPLED.to_vec(),
            n_min: 4,
            n_max: 8,
            daemons: vec![
                DaemonStrategy::Synchronous,
                DaemonStrategy::CentralRandom,
                DaemonStrategy::DistributedRandom(0.5),
            ],
            seeds_per_cell: 500,
            period: PeriodPolicy::Auto,
            exhaustive: true,
            exhaustive_max_n: 3,
            enumeration_depth: 20,
            base_seed: 0,
            inject_fault: false,
        }
    }

    /// Checks that every cell and exhaustive instance has a valid topology
    /// and period.
    pub fn validate(&self) -> Result<(), String> {
        if self.exhaustive && self.exhaustive_max_n > 3 {
            return Err(format!("exhaustive exploration covers at most 3 nodes, got {}", self.exhaustive_max_n));
        }
        if self.n_min > self.n_max {
            return Err(format!("empty node range {}..={}", self.n_min, self.n_max));
        }
        for cell in self.cells() {
            let t = cell.topology().map_err(|e| format!("{}:{}: {e}", cell.family, cell.n))?;
            self.period.resolve(&t).map_err(|e| format!("{}:{}: {e}", cell.family, cell.n))?;
        }
        if self.exhaustive {
            for t in small_graphs().into_iter().filter(|t| t.n() <= self.exhaustive_max_n) {
                self.period.resolve(&t).map_err(|e| format!("exhaustive n={}: {e}", t.n()))?;
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &family in &self.families {
            for n in self.n_min..=self.n_max {
                for daemon in &self.daemons {
                    for k in 0..self.seeds_per_cell {
                        out.push(Cell {
                            family,
                            n,
                            daemon: daemon.clone(),
                            seed: self.base_seed + k as u64,
                            period: self.period,
                        });
                    }
                }
            }
        }
        out
    }
}

/// One sampled run: random topology (for the random family) and random
/// initial configuration, both derived from `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub family: Family,
    pub n: usize,
    pub daemon: DaemonStrategy,
    pub seed: u64,
    pub period: PeriodPolicy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellResult {
    pub family: Family,
    pub n: usize,
    #[serde(rename = "B")]
    pub period: i32,
    #[serde(rename = "D")]
    pub diameter: usize,
    pub daemon: String,
    pub seed: u64,
    pub steps: usize,
    pub moves: usize,
    pub rounds_to_clean: Option<usize>,
    pub termination: Termination,
    pub status: VerificationStatus,
    pub violations: Vec<Violation>,
}

/// Upper bound on the moves before the first clean configuration implied by
/// the per-node budgets, used to size step limits:
/// `n (1 + nB + 2D (n + 1))` for R, P and U plus `n^2 B + n` for C.
pub fn move_budget(n: usize, period: Period, diameter: usize) -> usize {
    let b = period.get() as usize;
    n * (1 + n * b + 2 * diameter * (n + 1)) + n * n * b + n
}

/// Steps run after the first clean configuration.
pub fn linger_steps(n: usize) -> usize {
    4 * n
}

impl Cell {
    pub fn topology(&self) -> Result<Topology, crate::topology::TopologyError> {
        Topology::generate(&self.family.kind(self.n), self.seed)
    }

    pub fn run(&self, inject_fault: bool) -> CellResult {
        let t = self.topology().expect("campaign graphs are valid");
        let period = self.period.resolve(&t).expect("campaign periods are valid");
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        let init = random_configuration(t.n(), period, &mut rng);
        let proto = Unison::greedy();
        let limits = Limits::new(move_budget(t.n(), period, t.diameter()) + linger_steps(t.n()) + 1, StopOn::Clean)
            .lingering(linger_steps(t.n()));
        let mut trace = run_execution(&proto, &t, period, init, &self.daemon, limits, self.seed).expect("campaign inputs are valid");
        if inject_fault {
            forge_step(&mut trace);
        }
        let mut report = verify_trace(&proto, &trace);
        if trace.termination == Termination::StepLimit && report.summary.first_clean.is_none() {
            report.extend(Report::from_iter([Violation::new(
                K::NonTermination,
                format!("no clean configuration within {} steps", trace.steps.len()),
            )]));
        }
        CellResult {
            family: self.family,
            n: t.n(),
            period: period.get(),
            diameter: t.diameter(),
            daemon: self.daemon.to_string(),
            seed: self.seed,
            steps: trace.steps.len(),
            moves: report.summary.moves,
            rounds_to_clean: report.summary.rounds_to_clean,
            termination: trace.termination,
            status: report.status,
            violations: report.all().cloned().collect(),
        }
    }
}

/// Appends a step claiming an `R_U` move by node 0 that leaves its state
/// unchanged. Replay always rejects it: either node 0 cannot move, or its
/// move changes the clock.
pub fn forge_step<S: Clone>(trace: &mut Trace<S>) {
    let post = trace.last_config().to_vec();
    trace.steps.push(StepRecord {
        index: trace.steps.len(),
        selected: vec![0],
        fired: vec![(0, Rule::RU)],
        post,
    });
}

/// Path enumeration over every initial configuration, each path verified as
/// a trace on its own.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnumerationOutcome {
    pub graph: String,
    #[serde(rename = "B")]
    pub period: i32,
    pub aux: String,
    pub traces: usize,
    pub max_rounds_to_clean: usize,
    pub bounds_exceeded: bool,
    pub violations: Vec<Violation>,
}

pub fn enumerate_and_verify<P: Protocol<State = NodeState>>(
    proto: &P,
    t: &Topology,
    period: Period,
    depth: usize,
    inject_fault: bool,
) -> EnumerationOutcome {
    let mut report = Report::default();
    let mut traces = 0;
    let mut max_rounds = 0;
    let mut exceeded = false;
    for init in all_configurations(t.n(), period) {
        let bounds = EnumerationBounds {
            max_depth: depth,
            max_visited: usize::MAX,
        };
        let mut it = enumerate_executions(proto, t, period, init, StopOn::Clean, bounds).expect("valid inputs");
        for mut trace in it.by_ref() {
            traces += 1;
            if inject_fault {
                forge_step(&mut trace);
            }
            let r = verify_trace(proto, &trace);
            if let Some(k) = r.summary.rounds_to_clean {
                max_rounds = max_rounds.max(k);
            }
            report.merge(r.all().cloned().collect());
        }
        exceeded |= it.bounds_exceeded();
    }
    EnumerationOutcome {
        graph: graph_label(t),
        period: period.get(),
        aux: proto.aux_label(),
        traces,
        max_rounds_to_clean: max_rounds,
        bounds_exceeded: exceeded,
        violations: report.violations,
    }
}

/// Every connected graph with at most three nodes, up to isomorphism.
pub fn small_graphs() -> Vec<Topology> {
    vec![
        Topology::path(1).unwrap(),
        Topology::path(2).unwrap(),
        Topology::path(3).unwrap(),
        Topology::complete(3).unwrap(),
    ]
}

fn graph_label(t: &Topology) -> String {
    format!("n={} edges={:?}", t.n(), t.edges())
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CampaignReport {
    pub cells: Vec<CellResult>,
    pub exhaustive: Vec<ExhaustiveOutcome>,
    pub enumerated: Vec<EnumerationOutcome>,
}

impl CampaignReport {
    /// Every violation with the cell or instance it came from.
    pub fn violations(&self) -> Vec<(String, Violation)> {
        let mut out = Vec::new();
        for c in &self.cells {
            let label = format!("{}:{} {} seed {}", c.family, c.n, c.daemon, c.seed);
            out.extend(c.violations.iter().map(|v| (label.clone(), v.clone())));
        }
        for e in &self.exhaustive {
            let label = format!("exhaustive n={} B={} aux={}", e.n, e.period, e.aux);
            out.extend(e.report.violations.iter().map(|v| (label.clone(), v.clone())));
        }
        for e in &self.enumerated {
            let label = format!("enumerated {} B={} aux={}", e.graph, e.period, e.aux);
            out.extend(e.violations.iter().map(|v| (label.clone(), v.clone())));
        }
        out
    }

    pub fn status(&self) -> VerificationStatus {
        let all = self.violations();
        if all.iter().any(|(_, v)| !v.kind.is_bound()) {
            VerificationStatus::InvariantViolation
        } else if all.is_empty() {
            VerificationStatus::Ok
        } else {
            VerificationStatus::BoundViolation
        }
    }

    pub fn counts(&self) -> std::collections::BTreeMap<K, usize> {
        self.violations().into_iter().map(|(_, v)| v).collect::<Report>().counts()
    }

    /// Observational rows, one per sampled cell.
    pub fn csv(&self) -> String {
        let mut s = String::from("family,daemon,seed,n,B,D,moves,rounds_to_clean\n");
        for c in &self.cells {
            let rounds = c.rounds_to_clean.map(|r| r.to_string()).unwrap_or_default();
            s.push_str(&format!("{},{},{},{},{},{},{},{}\n", c.family, c.daemon, c.seed, c.n, c.period, c.diameter, c.moves, rounds));
        }
        s
    }
}

fn exhaustive_part(spec: &CampaignSpec, exec: Execution) -> (Vec<ExhaustiveOutcome>, Vec<EnumerationOutcome>) {
    let mut jobs = Vec::new();
    for t in small_graphs().into_iter().filter(|t| t.n() <= spec.exhaustive_max_n) {
        let period = spec.period.resolve(&t).expect("small graphs accept the campaign period");
        for aux in [AuxPredicate::AlwaysTrue, AuxPredicate::AlwaysFalse] {
            jobs.push((t.clone(), period, aux));
        }
    }
    let explored = exec.map(&jobs, |(t, period, aux)| explore_state_space(&Unison::with_aux(aux.clone()), t, *period));
    let small: Vec<_> = jobs.iter().filter(|(t, _, _)| t.n() <= 2).cloned().collect();
    let mut enumerated = exec.map(&small, |(t, period, aux)| {
        enumerate_and_verify(&Unison::with_aux(aux.clone()), t, *period, spec.enumeration_depth, spec.inject_fault)
    });
    // Both routes must find the same worst case.
    for e in enumerated.iter_mut() {
        let twin = jobs
            .iter()
            .zip(&explored)
            .find(|((t, p, aux), _)| graph_label(t) == e.graph && p.get() == e.period && Unison::with_aux(aux.clone()).aux_label() == e.aux)
            .map(|(_, o)| o);
        if let Some(o) = twin {
            if !e.bounds_exceeded && o.max_rounds_to_clean != e.max_rounds_to_clean {
                e.violations.push(Violation::new(
                    K::OracleDisagreement,
                    format!("state-space worst case {} rounds, path enumeration {}", o.max_rounds_to_clean, e.max_rounds_to_clean),
                ));
            }
        }
    }
    (explored, enumerated)
}

pub fn run_campaign(spec: &CampaignSpec) -> CampaignReport {
    run_campaign_with(spec, Execution::Parallel)
}

pub fn run_campaign_with(spec: &CampaignSpec, exec: Execution) -> CampaignReport {
    let (exhaustive, enumerated) = if spec.exhaustive { exhaustive_part(spec, exec) } else { Default::default() };
    let cells = spec.cells();
    let cells = exec.map(&cells, |c| c.run(spec.inject_fault));
    CampaignReport {
        cells,
        exhaustive,
        enumerated,
    }
}
