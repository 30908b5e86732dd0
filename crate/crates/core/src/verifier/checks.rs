//! Trace-level oracles: structural invariants, liveness, replay and the
//! exact move and round budgets.

use crate::clock::{NodeState, Period};
use crate::protocol::{apply_step, enabled_set, neighbor_view, HasUnison, Protocol};
use crate::rules::Rule;
use crate::scheduler::{round_boundaries, rounds_to_reach};
use crate::topology::{NodeId, Topology};
use crate::trace::{Termination, Trace};
use crate::verifier::classify::{classify_configuration, is_root_at, roots_of, ConfigClass};
use crate::verifier::interval::{color_interval, find_hole};
use crate::verifier::paths::{find_e_path, is_e_path, EPathError};
use crate::verifier::report::{Report, TraceSummary, VerificationReport, Violation, ViolationKind as K};
use crate::verifier::segments::{decompose_configs, move_census, SegmentDecomposition};

/// Checks that only depend on one configuration: the two characterizations
/// agree, almost-clean configurations have a hole and a contiguous clock
/// interval of span at most `D`, and every erroneous node starts an E-path.
/// Returns the class (root-based when the characterizations disagree).
pub fn config_violations(cfg: &[NodeState], t: &Topology, period: Period, index: usize, out: &mut Report) -> ConfigClass {
    let class = match classify_configuration(cfg, t, period) {
        Ok(c) => c,
        Err(e) => {
            out.push(Violation::new(K::Characterization, e.to_string()).at(index));
            e.by_definition
        }
    };
    if class.is_almost_clean() {
        if find_hole(cfg, period).is_none() {
            out.push(Violation::new(K::Hole, "every value in [0, B) is used").at(index));
        }
        match color_interval(cfg, period) {
            Some(iv) if iv.exact && iv.span <= t.diameter() => {}
            Some(iv) => out.push(
                Violation::new(
                    K::ColorInterval,
                    format!("clocks are not {{{} +_B i : i <= {}}} with span <= {}", iv.c_min, iv.span, t.diameter()),
                )
                .at(index),
            ),
            None => out.push(Violation::new(K::ColorInterval, "no interval start").at(index)),
        }
    }
    for p in t.nodes().filter(|&p| cfg[p].is_error()) {
        if let Some(v) = e_path_violation(cfg, t, period, p, find_e_path(cfg, t, period, p)) {
            out.push(v.at(index));
        }
    }
    class
}

/// Judges the E-path offered for erroneous node `p`.
pub fn e_path_violation(
    cfg: &[NodeState],
    t: &Topology,
    period: Period,
    p: NodeId,
    found: Result<Vec<NodeId>, EPathError>,
) -> Option<Violation> {
    match found {
        Err(e) => Some(Violation::new(K::EPath, e.to_string()).node(p)),
        Ok(path) if path.first() != Some(&p) || !is_e_path(cfg, t, period, &path) => {
            Some(Violation::new(K::EPath, format!("{path:?} is not an E-path from {p}")).node(p))
        }
        Ok(_) => None,
    }
}

/// Checks on one step `pre -> post` (configuration `index` to `index + 1`).
pub fn step_violations(
    pre: &[NodeState],
    post: &[NodeState],
    fired: &[(NodeId, Rule)],
    classes: (ConfigClass, ConfigClass),
    t: &Topology,
    period: Period,
    index: usize,
    out: &mut Report,
) {
    let pre_roots = roots_of(pre, t, period);
    for r in roots_of(post, t, period) {
        if !pre_roots.contains(&r) {
            out.push(Violation::new(K::RootCreation, "root absent from the previous configuration").at(index + 1).node(r));
        }
    }
    let (a, b) = classes;
    if a == ConfigClass::Clean && b != ConfigClass::Clean {
        out.push(Violation::new(K::CleanClosure, format!("{a:?} -> {b:?}")).at(index + 1));
    }
    if a.is_almost_clean() && !b.is_almost_clean() {
        out.push(Violation::new(K::AlmostCleanClosure, format!("{a:?} -> {b:?}")).at(index + 1));
    }
    for &(p, rule) in fired {
        if rule == Rule::RC && pre_roots.contains(&p) {
            if pre[p].clock != period.floor() {
                out.push(Violation::new(K::RootClearing, format!("root cleared at clock {}", pre[p].clock)).at(index).node(p));
            }
            if is_root_at(post, t, period, p) {
                out.push(Violation::new(K::RootClearing, "still a root after clearing").at(index + 1).node(p));
            }
        }
    }
}

pub fn check_invariants_configs(configs: &[Vec<NodeState>], fired: &[&[(NodeId, Rule)]], t: &Topology, period: Period) -> Report {
    let mut out = Report::default();
    let classes: Vec<ConfigClass> = configs
        .iter()
        .enumerate()
        .map(|(i, c)| config_violations(c, t, period, i, &mut out))
        .collect();
    for (k, f) in fired.iter().enumerate() {
        step_violations(&configs[k], &configs[k + 1], f, (classes[k], classes[k + 1]), t, period, k, &mut out);
    }
    out
}

pub fn check_invariants<S: HasUnison>(trace: &Trace<S>) -> Report {
    let fired: Vec<&[(NodeId, Rule)]> = trace.steps.iter().map(|s| s.fired.as_slice()).collect();
    check_invariants_configs(&trace.unison_configs(), &fired, trace.topology(), trace.period())
}

/// In a clean configuration where some node satisfies `P_aux`, some node
/// must be enabled.
pub fn liveness_violation<P: Protocol>(proto: &P, cfg: &[P::State], t: &Topology, period: Period, index: usize) -> Option<Violation> {
    let unison: Vec<NodeState> = cfg.iter().map(HasUnison::unison).collect();
    if !crate::verifier::is_clean(&unison, t, period) {
        return None;
    }
    let aux_somewhere = t.nodes().any(|p| proto.aux(&cfg[p], &neighbor_view(cfg, t, p)));
    if aux_somewhere && enabled_set(proto, cfg, t, period).is_empty() {
        Some(Violation::new(K::Liveness, "clean, P_aux holds somewhere, nothing enabled").at(index))
    } else {
        None
    }
}

pub fn check_liveness<P: Protocol>(proto: &P, trace: &Trace<P::State>) -> Report {
    let t = trace.topology();
    trace
        .configs()
        .enumerate()
        .filter_map(|(i, cfg)| liveness_violation(proto, cfg, t, trace.period(), i))
        .collect()
}

/// Re-executes every recorded step and compares selections, fired rules and
/// successors bit for bit. Also checks that a `Terminal` trace really ends
/// in a terminal configuration.
pub fn replay<P: Protocol>(proto: &P, trace: &Trace<P::State>) -> Report {
    let t = trace.topology();
    let period = trace.period();
    let mut out = Report::default();
    for (k, step) in trace.steps.iter().enumerate() {
        let pre = trace.config(k);
        let enabled = enabled_set(proto, pre, t, period);
        if let Some(&p) = step.selected.iter().find(|p| !enabled.contains(p)) {
            out.push(Violation::new(K::Replay, "selected node is not enabled").at(k).node(p));
            continue;
        }
        match apply_step(proto, pre, t, period, &step.selected) {
            Err(e) => out.push(Violation::new(K::Replay, e.to_string()).at(k)),
            Ok((next, fired)) => {
                if fired != step.fired {
                    out.push(Violation::new(K::Replay, format!("fired {:?}, recorded {:?}", fired, step.fired)).at(k));
                }
                if next != step.post {
                    out.push(Violation::new(K::Replay, "successor differs from the recorded one").at(k + 1));
                }
            }
        }
    }
    if trace.termination == Termination::Terminal && !enabled_set(proto, trace.last_config(), t, period).is_empty() {
        out.push(Violation::new(K::Replay, "trace ends Terminal with enabled nodes").at(trace.steps.len()));
    }
    out
}

pub fn first_clean_index(configs: &[Vec<NodeState>], t: &Topology, period: Period) -> Option<usize> {
    configs.iter().position(|c| crate::verifier::is_clean(c, t, period))
}

/// Budgets that hold on every execution: per-node R-moves at most 1, U-moves
/// at most `2D` per unclean segment, P-moves at most `nB`, total C-moves at
/// most total P-moves plus `n`, the first clean configuration within `2D + 2`
/// rounds, and clock growth at most `2D` before it.
pub fn check_bounds_configs(
    configs: &[Vec<NodeState>],
    segments: Option<&SegmentDecomposition>,
    census: &crate::verifier::MoveCensus,
    boundaries: &[usize],
    t: &Topology,
    period: Period,
) -> Report {
    let n = t.n();
    let d = t.diameter();
    let nb = n * period.get() as usize;
    let mut out = Report::default();
    for (p, m) in census.nodes.iter().enumerate() {
        if m.r > 1 {
            out.push(Violation::new(K::RMoves, format!("{} R-moves", m.r)).node(p));
        }
        if m.p > nb {
            out.push(Violation::new(K::PMoves, format!("{} P-moves > nB = {nb}", m.p)).node(p));
        }
        if let Some(seg) = segments {
            for (s, &u) in m.u_by_segment.iter().enumerate() {
                if !seg.segments[s].clean && u > 2 * d {
                    out.push(
                        Violation::new(K::UMoves, format!("{u} U-moves in unclean segment {s} > 2D = {}", 2 * d))
                            .at(seg.segments[s].start)
                            .node(p),
                    );
                }
            }
        }
    }
    if census.total_c() > census.total_p() + n {
        out.push(Violation::new(
            K::CMoves,
            format!("{} C-moves > {} P-moves + n", census.total_c(), census.total_p()),
        ));
    }
    let first_clean = first_clean_index(configs, t, period);
    let cap = 2 * d + 2;
    match first_clean {
        Some(f) => {
            let r = rounds_to_reach(boundaries, 0, f);
            if r > cap {
                out.push(Violation::new(K::RoundsToClean, format!("clean after {r} rounds > 2D+2 = {cap}")).at(f));
            }
        }
        None if boundaries.len() >= cap => {
            out.push(Violation::new(K::RoundsToClean, format!("not clean after {} rounds", boundaries.len())).at(boundaries[cap - 1]));
        }
        None => {}
    }
    // Every configuration up to h is not clean.
    let h = match first_clean {
        Some(f) => f.checked_sub(1),
        None => Some(configs.len() - 1),
    };
    if let Some(h) = h {
        for p in 0..n {
            let mut low = configs[0][p].clock;
            for (j, cfg) in configs.iter().enumerate().take(h + 1).skip(1) {
                let growth = cfg[p].clock - low;
                if growth > 2 * d as i32 {
                    out.push(Violation::new(K::ClockGrowth, format!("clock grew by {growth} > 2D")).at(j).node(p));
                    break;
                }
                low = low.min(cfg[p].clock);
            }
        }
    }
    out
}

pub fn check_bounds<S: HasUnison>(trace: &Trace<S>, boundaries: &[usize]) -> Report {
    let configs = trace.unison_configs();
    let segments = decompose_configs(&configs, trace.topology(), trace.period()).ok();
    let census = match &segments {
        Some(s) => move_census(trace, s),
        None => move_census(trace, &trivial_decomposition(configs.len())),
    };
    check_bounds_configs(&configs, segments.as_ref(), &census, boundaries, trace.topology(), trace.period())
}

fn trivial_decomposition(len: usize) -> SegmentDecomposition {
    SegmentDecomposition {
        boundaries: Vec::new(),
        segments: vec![crate::verifier::Segment {
            start: 0,
            end: len - 1,
            clean: false,
        }],
        roots: Vec::new(),
    }
}

pub fn summarize<S: HasUnison>(trace: &Trace<S>, boundaries: &[usize]) -> TraceSummary {
    let t = trace.topology();
    let configs = trace.unison_configs();
    let census = move_census(trace, &trivial_decomposition(configs.len()));
    let first_clean = first_clean_index(&configs, t, trace.period());
    TraceSummary {
        n: t.n(),
        period: trace.period().get(),
        diameter: t.diameter(),
        steps: trace.steps.len(),
        moves: census.total(),
        r_moves: census.nodes.iter().map(|m| m.r).sum(),
        p_moves: census.total_p(),
        c_moves: census.total_c(),
        u_moves: census.nodes.iter().map(|m| m.u).sum(),
        rounds: boundaries.len(),
        first_clean,
        rounds_to_clean: first_clean.map(|f| rounds_to_reach(boundaries, 0, f)),
        termination: trace.termination,
    }
}

/// Replay, structural invariants, liveness and budgets for one trace.
pub fn verify_trace<P: Protocol>(proto: &P, trace: &Trace<P::State>) -> VerificationReport {
    let boundaries = round_boundaries(proto, trace);
    let mut report = replay(proto, trace);
    report.merge(check_invariants(trace));
    report.merge(check_liveness(proto, trace));
    report.merge(check_bounds(trace, &boundaries));
    VerificationReport::new(report, summarize(trace, &boundaries))
}
