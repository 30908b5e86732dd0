//! Synchronizer runs over small graphs, verified against the synchronous
//! reference executor.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::campaign::{linger_steps, move_budget, Execution, Family};
use crate::clock::{NodeState, Period};
use crate::config::random_configuration;
use crate::scheduler::{run_execution, DaemonStrategy, Limits, StopOn};
use crate::synchronizer::{alg_min_id_bfs, alg_min_propagation, verify_sim_trace, Mode, SimNodeState, SimSummary, SyncAlgorithm, Synchronizer};
use crate::topology::Topology;
use crate::trace::Termination;
use crate::verifier::{VerificationStatus, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgChoice {
    MinProp,
    MinIdBfs,
}

impl fmt::Display for AlgChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgChoice::MinProp => "min-prop",
            AlgChoice::MinIdBfs => "min-id-bfs",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    /// All clocks `(C, c)` for one random `c`; `old = curr` random.
    Clean,
    /// Random unison pairs, independent random `old` and `curr`.
    Arbitrary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncCell {
    pub alg: AlgChoice,
    pub mode: Mode,
    pub start: Start,
    pub seed: u64,
}

const DAEMONS: [DaemonStrategy; 3] = [
    DaemonStrategy::Synchronous,
    DaemonStrategy::CentralRandom,
    DaemonStrategy::DistributedRandom(0.5),
];

impl SyncCell {
    /// Graph family cycles with the seed, `n` runs through 2..=8.
    pub fn topology(&self) -> Topology {
        let family = Family::SAMPLED[self.seed as usize % 4];
        let n = 2 + (self.seed as usize / 4) % 7;
        Topology::generate(&family.kind(n), self.seed).expect("valid generator")
    }

    pub fn daemon(&self) -> DaemonStrategy {
        DAEMONS[self.seed as usize % 3].clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyncCellResult {
    pub alg: AlgChoice,
    pub mode: String,
    pub start: Start,
    pub seed: u64,
    pub n: usize,
    #[serde(rename = "D")]
    pub diameter: usize,
    pub daemon: String,
    pub steps: usize,
    pub termination: Termination,
    pub status: VerificationStatus,
    pub violations: Vec<Violation>,
    pub summary: SimSummary,
}

/// Step cap for lazy runs; they are expected to end terminal long before.
pub const LAZY_MAX_STEPS: usize = 200_000;

fn run_with<A: SyncAlgorithm>(alg: A, cell: &SyncCell, t: &Topology) -> SyncCellResult {
    let period = Period::auto(t);
    let n = t.n();
    let mut rng = ChaCha8Rng::seed_from_u64(cell.seed.wrapping_mul(0x2545_f491_4f6c_dd1d) ^ cell.start as u64);
    let unison: Vec<NodeState> = match cell.start {
        Start::Clean => vec![NodeState::correct(rng.gen_range(0..period.get())); n],
        Start::Arbitrary => random_configuration(n, period, &mut rng),
    };
    let init: Vec<SimNodeState<A::State>> = unison
        .into_iter()
        .enumerate()
        .map(|(p, u)| {
            let curr = alg.random_state(p, &mut rng);
            let old = match cell.start {
                Start::Clean => curr.clone(),
                Start::Arbitrary => alg.random_state(p, &mut rng),
            };
            SimNodeState::new(u, old, curr)
        })
        .collect();
    let sync = Synchronizer::new(alg, cell.mode);
    let limits = match cell.mode {
        Mode::Lazy => Limits::new(LAZY_MAX_STEPS, StopOn::Terminal),
        Mode::Greedy => {
            let linger = linger_steps(n) * (n + t.diameter() + 2);
            Limits::new(move_budget(n, period, t.diameter()) + linger + 1, StopOn::Clean).lingering(linger)
        }
    };
    let daemon = cell.daemon();
    let trace = run_execution(&sync, t, period, init, &daemon, limits, cell.seed).expect("campaign inputs are valid");
    let (report, summary) = verify_sim_trace(&sync, &trace);
    SyncCellResult {
        alg: cell.alg,
        mode: cell.mode.to_string(),
        start: cell.start,
        seed: cell.seed,
        n,
        diameter: t.diameter(),
        daemon: daemon.to_string(),
        steps: trace.steps.len(),
        termination: trace.termination,
        status: report.status,
        violations: report.all().cloned().collect(),
        summary,
    }
}

pub fn run_sync_cell(cell: &SyncCell) -> SyncCellResult {
    let t = cell.topology();
    match cell.alg {
        AlgChoice::MinProp => run_with(alg_min_propagation(), cell, &t),
        AlgChoice::MinIdBfs => run_with(alg_min_id_bfs(t.n()), cell, &t),
    }
}

/// Both algorithms, both modes, both start kinds, `seeds` seeds each.
pub fn sync_cells(seeds: usize) -> Vec<SyncCell> {
    let mut out = Vec::new();
    for alg in [AlgChoice::MinProp, AlgChoice::MinIdBfs] {
        for mode in [Mode::Greedy, Mode::Lazy] {
            for start in [Start::Clean, Start::Arbitrary] {
                out.extend((0..seeds as u64).map(|seed| SyncCell { alg, mode, start, seed }));
            }
        }
    }
    out
}

pub fn sync_campaign(seeds: usize, exec: Execution) -> Vec<SyncCellResult> {
    exec.map(&sync_cells(seeds), run_sync_cell)
}
