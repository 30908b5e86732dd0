//! Oracles for traces of the synchronizer.

use serde::Serialize;

use crate::clock::NodeState;
use crate::protocol::neighbor_view;
use crate::rules::{self, Rule};
use crate::scheduler::{boundaries_from, enabled_flags, rounds_to_reach};
use crate::synchronizer::algorithm::{stabilization_time, sync_step, SyncAlgorithm};
use crate::synchronizer::eta::{reconstruct_eta, EtaSequence};
use crate::synchronizer::sim::{Mode, SimNodeState, Synchronizer};
use crate::synchronizer::time::{time_series, Time, TimeError};
use crate::topology::NodeId;
use crate::trace::{Termination, Trace};
use crate::verifier::{first_clean_index, verify_trace, Report, VerificationReport, Violation, ViolationKind as K};

/// Cap on synchronous rounds when measuring the stabilization time.
pub const MAX_SYNC_ROUNDS: usize = 100_000;

/// Times and simulated configurations of a trace from its first clean
/// configuration on.
#[derive(Debug, Clone)]
pub struct SimAnalysis<S> {
    pub unison: Vec<Vec<NodeState>>,
    pub first_clean: Option<usize>,
    /// `times[j]` belongs to configuration `first_clean + j`.
    pub times: Vec<Vec<Time>>,
    pub eta: Option<EtaSequence<S>>,
    pub time_error: Option<TimeError>,
}

pub fn analyze<S: Clone>(trace: &Trace<SimNodeState<S>>) -> SimAnalysis<S> {
    let unison = trace.unison_configs();
    let t = trace.topology();
    let period = trace.period();
    let first_clean = first_clean_index(&unison, t, period);
    let mut out = SimAnalysis {
        unison,
        first_clean,
        times: Vec::new(),
        eta: None,
        time_error: None,
    };
    let Some(f) = first_clean else {
        return out;
    };
    let fired: Vec<&[(NodeId, Rule)]> = trace.steps.iter().map(|s| s.fired.as_slice()).collect();
    match time_series(&out.unison, &fired, f, t, period) {
        Ok(times) => {
            let configs: Vec<&[SimNodeState<S>]> = trace.configs().skip(f).collect();
            out.eta = Some(reconstruct_eta(&configs, &times));
            out.times = times;
        }
        Err(e) => out.time_error = Some(e),
    }
    out
}

/// Measured synchronous stabilization time from the reconstructed initial
/// simulated configuration.
pub fn measured_stabilization<A: SyncAlgorithm>(alg: &A, trace: &Trace<SimNodeState<A::State>>, analysis: &SimAnalysis<A::State>) -> Option<usize> {
    let eta0 = analysis.eta.as_ref()?.etas.first()?;
    stabilization_time(alg, trace.topology(), eta0, MAX_SYNC_ROUNDS)
}

/// Each consecutive pair of defined simulated configurations must be one
/// synchronous round apart.
pub fn check_simulation_equivalence<A: SyncAlgorithm>(
    alg: &A,
    trace: &Trace<SimNodeState<A::State>>,
    analysis: &SimAnalysis<A::State>,
) -> Report {
    let mut out = Report::default();
    if let Some(e) = &analysis.time_error {
        out.push(Violation::new(K::TimeAssignment, e.to_string()).at(analysis.first_clean.unwrap_or(0)));
    }
    let Some(eta) = &analysis.eta else {
        return out;
    };
    for (k, pair) in eta.etas.windows(2).enumerate() {
        if sync_step(alg, trace.topology(), &pair[0]) != pair[1] {
            out.push(Violation::new(K::SimulationMismatch, format!("simulated configuration {} is not one round after {k}", k + 1)));
        }
    }
    out
}

/// Time structure of the clean suffix: birth times in `[-D, 0]`, neighbors
/// at most one apart with equal times exactly when clocks are equal, and
/// `unisonMove(p)` exactly when `p`'s time is a local minimum.
pub fn check_time_invariants<S>(trace: &Trace<SimNodeState<S>>, analysis: &SimAnalysis<S>) -> Report {
    let mut out = Report::default();
    let Some(f) = analysis.first_clean else {
        return out;
    };
    let t = trace.topology();
    let period = trace.period();
    let d = t.diameter() as Time;
    if let Some(birth) = analysis.times.first() {
        for (p, &b) in birth.iter().enumerate() {
            if !(-d..=0).contains(&b) {
                out.push(Violation::new(K::TimeAssignment, format!("birth time {b} outside [-D, 0]")).at(f).node(p));
            }
        }
    }
    for (j, times) in analysis.times.iter().enumerate() {
        let k = f + j;
        let cfg = &analysis.unison[k];
        for &(p, q) in t.edges() {
            let diff = times[q] - times[p];
            let clocks_equal = cfg[p].clock == cfg[q].clock;
            let consistent = match diff {
                0 => clocks_equal,
                1 => period.increment(cfg[p].clock) == cfg[q].clock,
                -1 => period.increment(cfg[q].clock) == cfg[p].clock,
                _ => false,
            };
            if !consistent {
                out.push(Violation::new(K::TimeAssignment, format!("edge ({p}, {q}): times differ by {diff}")).at(k));
            }
        }
        for p in t.nodes() {
            let local_min = t.neighbors(p).iter().all(|&q| times[q] >= times[p]);
            let view = neighbor_view(cfg, t, p);
            if rules::is_unison_move(cfg[p], &view, period) != local_min {
                out.push(Violation::new(K::UnisonMoveMinimum, format!("local minimum = {local_min}")).at(k).node(p));
            }
        }
    }
    out
}

fn suffix_boundaries<A: SyncAlgorithm>(sync: &Synchronizer<A>, trace: &Trace<SimNodeState<A::State>>, start: usize) -> Vec<usize> {
    let enabled = enabled_flags(sync, trace);
    let selections: Vec<&[usize]> = trace.steps.iter().map(|s| s.selected.as_slice()).collect();
    boundaries_from(&enabled, &selections, start)
}

/// Greedy mode: across every completed round of the clean suffix the
/// minimum time grows by at least one.
pub fn check_greedy_progress<A: SyncAlgorithm>(
    sync: &Synchronizer<A>,
    trace: &Trace<SimNodeState<A::State>>,
    analysis: &SimAnalysis<A::State>,
) -> Report {
    let mut out = Report::default();
    let Some(f) = analysis.first_clean else {
        return out;
    };
    if analysis.times.is_empty() {
        return out;
    }
    let min_at = |k: usize| *analysis.times[k - f].iter().min().unwrap();
    let mut prev = f;
    for h in suffix_boundaries(sync, trace, f) {
        if min_at(h) < min_at(prev) + 1 {
            out.push(Violation::new(
                K::GreedyProgress,
                format!("minimum time {} at {h} after {} at {prev}", min_at(h), min_at(prev)),
            ).at(h));
        }
        prev = h;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LazyStats {
    pub t_measured: usize,
    pub moves_after_clean: usize,
    pub rounds_to_non_negative: Option<usize>,
    pub rounds_after_non_negative: Option<usize>,
    pub total_rounds: usize,
    pub max_time: Time,
}

/// Lazy-mode budgets against the measured stabilization time `t_sync`:
/// from the first clean configuration at most `n(T + D)` moves followed by
/// termination, every time at most `T`, all times non-negative within `2D`
/// rounds, then terminal within `max(0, D + 3T - 2)` rounds, and terminal
/// within `5D + 3T` rounds of the start.
pub fn check_lazy_bounds<A: SyncAlgorithm>(
    sync: &Synchronizer<A>,
    trace: &Trace<SimNodeState<A::State>>,
    analysis: &SimAnalysis<A::State>,
    t_sync: usize,
) -> (Report, Option<LazyStats>) {
    let mut out = Report::default();
    let t = trace.topology();
    let n = t.n();
    let d = t.diameter();
    let last = trace.steps.len();
    if trace.termination != Termination::Terminal {
        out.push(Violation::new(K::LazyTermination, format!("run ended with {}", trace.termination)).at(last));
    }
    let Some(f) = analysis.first_clean else {
        return (out, None);
    };
    if analysis.times.is_empty() {
        return (out, None);
    }
    let moves_after_clean: usize = trace.steps[f..].iter().map(|s| s.fired.len()).sum();
    let budget = n * (t_sync + d);
    if moves_after_clean > budget {
        out.push(Violation::new(K::LazyMoves, format!("{moves_after_clean} moves after clean > n(T + D) = {budget}")).at(f));
    }
    let max_time = analysis.times.iter().flatten().copied().max().unwrap();
    for (p, &m) in analysis.eta.as_ref().map(|e| e.max_times.as_slice()).unwrap_or(&[]).iter().enumerate() {
        if m > t_sync as Time {
            out.push(Violation::new(K::LazyMaxTime, format!("time {m} > T = {t_sync}")).node(p));
        }
    }
    let non_negative = analysis.times.iter().position(|ts| ts.iter().all(|&x| x >= 0)).map(|j| f + j);
    let from_clean = suffix_boundaries(sync, trace, f);
    let rounds_to_non_negative = non_negative.map(|g| rounds_to_reach(&from_clean, f, g));
    match rounds_to_non_negative {
        Some(r) if r > 2 * d => {
            out.push(Violation::new(K::LazyNonNegativeTimes, format!("times non-negative after {r} rounds > 2D")).at(non_negative.unwrap()));
        }
        None if from_clean.len() >= 2 * d => {
            out.push(Violation::new(K::LazyNonNegativeTimes, "some time still negative after 2D rounds"));
        }
        _ => {}
    }
    let terminal = trace.termination == Termination::Terminal;
    let rounds_after_non_negative = non_negative.map(|g| rounds_to_reach(&suffix_boundaries(sync, trace, g), g, last));
    if let (Some(r), true) = (rounds_after_non_negative, terminal) {
        let cap = (d + 3 * t_sync).saturating_sub(2);
        if r > cap {
            out.push(Violation::new(K::LazyRoundsAfterNonNegative, format!("{r} rounds to terminal > max(0, D + 3T - 2) = {cap}")));
        }
    }
    let total_rounds = rounds_to_reach(&suffix_boundaries(sync, trace, 0), 0, last);
    let cap = 5 * d + 3 * t_sync;
    if terminal && total_rounds > cap {
        out.push(Violation::new(K::LazyTotalRounds, format!("{total_rounds} rounds to terminal > 5D + 3T = {cap}")));
    }
    let stats = LazyStats {
        t_measured: t_sync,
        moves_after_clean,
        rounds_to_non_negative,
        rounds_after_non_negative,
        total_rounds,
        max_time,
    };
    (out, Some(stats))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimSummary {
    pub algorithm: String,
    pub mode: String,
    pub first_clean: Option<usize>,
    pub simulated_rounds: usize,
    pub t_measured: Option<usize>,
    pub lazy: Option<LazyStats>,
}

/// Everything [`verify_trace`] checks plus simulation equivalence, time
/// structure and the greedy progress or lazy budgets.
pub fn verify_sim_trace<A: SyncAlgorithm>(
    sync: &Synchronizer<A>,
    trace: &Trace<SimNodeState<A::State>>,
) -> (VerificationReport, SimSummary) {
    let mut report = verify_trace(sync, trace);
    let analysis = analyze(trace);
    let mut extra = check_simulation_equivalence(&sync.alg, trace, &analysis);
    extra.merge(check_time_invariants(trace, &analysis));
    let t_measured = measured_stabilization(&sync.alg, trace, &analysis);
    let mut lazy = None;
    match sync.mode {
        Mode::Greedy => extra.merge(check_greedy_progress(sync, trace, &analysis)),
        Mode::Lazy => {
            if let Some(t_sync) = t_measured {
                let (r, stats) = check_lazy_bounds(sync, trace, &analysis, t_sync);
                extra.merge(r);
                lazy = stats;
            } else if trace.termination != Termination::Terminal {
                extra.push(Violation::new(K::LazyTermination, format!("run ended with {} before any simulated configuration", trace.termination)));
            }
        }
    }
    report.extend(extra);
    let summary = SimSummary {
        algorithm: sync.alg.name().to_string(),
        mode: sync.mode.to_string(),
        first_clean: analysis.first_clean,
        simulated_rounds: analysis.eta.as_ref().map_or(0, |e| e.etas.len().saturating_sub(1)),
        t_measured,
        lazy,
    };
    (report, summary)
}
