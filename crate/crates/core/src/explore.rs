//! Exhaustive exploration of every configuration and every daemon choice
//! for tiny instances.
//!
//! Every domain-valid configuration is a legal initial configuration, so
//! the worst case of a path quantity over all executions is a longest-path
//! problem on the configuration graph. Before the first clean configuration
//! that graph must be acyclic; a cycle there is reported as non-termination.

use std::collections::HashMap;

use serde::Serialize;

use crate::clock::{NodeState, Period};
use crate::config::all_configurations;
use crate::protocol::{apply_step, enabled_set, Protocol};
use crate::rules::Rule;
use crate::topology::{NodeId, Topology};
use crate::verifier::{config_violations, is_clean, liveness_violation, roots_of, step_violations, ConfigClass, Report, Violation, ViolationKind as K};

struct Edge {
    to: usize,
    /// Bitmask of the selected nodes.
    selected: u64,
    fired: Vec<(NodeId, Rule)>,
}

struct Node {
    cfg: Vec<NodeState>,
    clean: bool,
    enabled: u64,
    roots: usize,
    edges: Vec<Edge>,
}

/// Worst cases over all executions of the explored instance.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExhaustiveOutcome {
    pub n: usize,
    #[serde(rename = "B")]
    pub period: i32,
    #[serde(rename = "D")]
    pub diameter: usize,
    pub aux: String,
    pub configurations: usize,
    pub transitions: usize,
    pub clean_configurations: usize,
    pub max_rounds_to_clean: usize,
    pub max_r_moves: usize,
    pub max_p_moves: usize,
    pub max_u_moves_per_unclean_segment: usize,
    /// Largest `C - P` total over an execution.
    pub max_c_minus_p: i64,
    pub max_clock_growth: i64,
    pub max_moves_to_clean: usize,
    #[serde(skip)]
    pub report: Report,
}

fn state_index(period: Period) -> HashMap<NodeState, usize> {
    NodeState::all(period).enumerate().map(|(i, s)| (s, i)).collect()
}

fn encode(cfg: &[NodeState], idx: &HashMap<NodeState, usize>, radix: usize) -> usize {
    cfg.iter().rev().fold(0, |acc, s| acc * radix + idx[s])
}

fn mask_nodes(mask: u64) -> Vec<NodeId> {
    (0..64).filter(|p| mask & (1 << p) != 0).collect()
}

/// Explores all configurations of `t` under `proto` with every nonempty
/// selection of enabled nodes, checking the per-configuration and per-step
/// oracles and the exact budgets over all executions.
pub fn explore_state_space<P: Protocol<State = NodeState>>(proto: &P, t: &Topology, period: Period) -> ExhaustiveOutcome {
    let n = t.n();
    assert!(n <= 6, "state-space exploration is meant for tiny graphs");
    let idx = state_index(period);
    let radix = idx.len();
    let mut report = Report::default();

    let mut nodes: Vec<Node> = Vec::new();
    let mut classes: Vec<ConfigClass> = Vec::new();
    for (i, cfg) in all_configurations(n, period).enumerate() {
        debug_assert_eq!(encode(&cfg, &idx, radix), i);
        let mut local = Report::default();
        let class = config_violations(&cfg, t, period, i, &mut local);
        if let Some(v) = liveness_violation(proto, &cfg, t, period, i) {
            local.push(v);
        }
        let enabled = enabled_set(proto, &cfg, t, period);
        let clean = is_clean(&cfg, t, period);
        if enabled.is_empty() && !clean {
            local.push(Violation::new(K::Liveness, "terminal configuration that is not clean").at(i));
        }
        report.merge(local);
        classes.push(class);
        nodes.push(Node {
            roots: roots_of(&cfg, t, period).len(),
            cfg,
            clean,
            enabled: enabled.iter().fold(0, |m, &p| m | (1 << p)),
            edges: Vec::new(),
        });
    }

    let mut transitions = 0;
    for i in 0..nodes.len() {
        let enabled = mask_nodes(nodes[i].enabled);
        let k = enabled.len();
        let mut edges = Vec::with_capacity((1 << k) - 1);
        for sub in 1u64..(1 << k) {
            let selected: Vec<NodeId> = (0..k).filter(|b| sub & (1 << b) != 0).map(|b| enabled[b]).collect();
            let (next, fired) = apply_step(proto, &nodes[i].cfg, t, period, &selected).expect("enabled selection");
            let to = encode(&next, &idx, radix);
            step_violations(&nodes[i].cfg, &next, &fired, (classes[i], classes[to]), t, period, i, &mut report);
            edges.push(Edge {
                to,
                selected: selected.iter().fold(0, |m, &p| m | (1 << p)),
                fired,
            });
        }
        transitions += edges.len();
        nodes[i].edges = edges;
    }

    let mut out = ExhaustiveOutcome {
        n,
        period: period.get(),
        diameter: t.diameter(),
        aux: proto.aux_label(),
        configurations: nodes.len(),
        transitions,
        clean_configurations: nodes.iter().filter(|x| x.clean).count(),
        ..ExhaustiveOutcome::default()
    };

    let Some(order) = topological_order(&nodes) else {
        report.push(Violation::new(K::NonTermination, "cycle among configurations that are not clean"));
        out.report = report;
        return out;
    };
    longest_paths(&nodes, &order, t, period, &mut out, &mut report);
    out.max_rounds_to_clean = max_rounds(&nodes);
    let cap = 2 * t.diameter() + 2;
    if out.max_rounds_to_clean > cap {
        report.push(Violation::new(K::RoundsToClean, format!("{} rounds > 2D+2 = {cap}", out.max_rounds_to_clean)));
    }
    out.report = report;
    out
}

/// Reverse topological order of the non-clean subgraph (successors first),
/// or `None` if it has a cycle.
fn topological_order(nodes: &[Node]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark = vec![Mark::New; nodes.len()];
    let mut order = Vec::new();
    for root in 0..nodes.len() {
        if nodes[root].clean || mark[root] != Mark::New {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Open;
        while let Some(&mut (v, ref mut e)) = stack.last_mut() {
            if let Some(edge) = nodes[v].edges.get(*e) {
                *e += 1;
                let w = edge.to;
                if nodes[w].clean {
                    continue;
                }
                match mark[w] {
                    Mark::New => {
                        mark[w] = Mark::Open;
                        stack.push((w, 0));
                    }
                    Mark::Open => return None,
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                order.push(v);
                stack.pop();
            }
        }
    }
    Some(order)
}

fn longest_paths(nodes: &[Node], order: &[usize], t: &Topology, period: Period, out: &mut ExhaustiveOutcome, report: &mut Report) {
    let n = t.n();
    let len = nodes.len();
    let d = t.diameter();
    // Per configuration and node: most R, P, and segment-local U moves until
    // clean; highest clock reachable through non-clean configurations.
    let mut r = vec![vec![0usize; n]; len];
    let mut p = vec![vec![0usize; n]; len];
    let mut u = vec![vec![0usize; n]; len];
    let mut high: Vec<Vec<i64>> = nodes.iter().map(|x| x.cfg.iter().map(|s| s.clock as i64).collect()).collect();
    let mut c_minus_p = vec![0i64; len];
    let mut moves = vec![0usize; len];
    for &v in order {
        for e in &nodes[v].edges {
            let w = e.to;
            let to_clean = nodes[w].clean;
            let shrink = nodes[w].roots < nodes[v].roots;
            let mut delta = 0i64;
            for q in 0..n {
                let rule = e.fired.iter().find(|f| f.0 == q).map(|f| f.1);
                let is = |want: fn(Rule) -> bool| rule.is_some_and(want) as usize;
                let dr = is(|x| x == Rule::RR);
                let dp = is(|x| matches!(x, Rule::RP(_)));
                let du = is(|x| x == Rule::RU);
                let (rw, pw, uw) = if to_clean { (0, 0, 0) } else { (r[w][q], p[w][q], u[w][q]) };
                r[v][q] = r[v][q].max(dr + rw);
                p[v][q] = p[v][q].max(dp + pw);
                u[v][q] = u[v][q].max(du + if shrink { 0 } else { uw });
                if !to_clean {
                    high[v][q] = high[v][q].max(high[w][q]);
                }
                delta += is(|x| x == Rule::RC) as i64 - dp as i64;
            }
            let rest = if to_clean { 0 } else { c_minus_p[w] };
            c_minus_p[v] = c_minus_p[v].max(delta + rest);
            let rest = if to_clean { 0 } else { moves[w] };
            moves[v] = moves[v].max(e.fired.len() + rest);
        }
    }
    let nb = n * period.get() as usize;
    for &v in order {
        for q in 0..n {
            out.max_r_moves = out.max_r_moves.max(r[v][q]);
            out.max_p_moves = out.max_p_moves.max(p[v][q]);
            out.max_u_moves_per_unclean_segment = out.max_u_moves_per_unclean_segment.max(u[v][q]);
            out.max_clock_growth = out.max_clock_growth.max(high[v][q] - nodes[v].cfg[q].clock as i64);
        }
        out.max_c_minus_p = out.max_c_minus_p.max(c_minus_p[v]);
        out.max_moves_to_clean = out.max_moves_to_clean.max(moves[v]);
    }
    if out.max_r_moves > 1 {
        report.push(Violation::new(K::RMoves, format!("{} R-moves on one node", out.max_r_moves)));
    }
    if out.max_p_moves > nb {
        report.push(Violation::new(K::PMoves, format!("{} P-moves > nB = {nb}", out.max_p_moves)));
    }
    if out.max_u_moves_per_unclean_segment > 2 * d {
        report.push(Violation::new(K::UMoves, format!("{} U-moves in an unclean segment > 2D", out.max_u_moves_per_unclean_segment)));
    }
    if out.max_c_minus_p > n as i64 {
        report.push(Violation::new(K::CMoves, format!("C - P reaches {} > n", out.max_c_minus_p)));
    }
    if out.max_clock_growth > 2 * d as i64 {
        report.push(Violation::new(K::ClockGrowth, format!("clock grows by {} > 2D before clean", out.max_clock_growth)));
    }
}

/// Most rounds any execution needs to reach a clean configuration, with
/// rounds tracked by neutralization: `(configuration, pending nodes)`.
fn max_rounds(nodes: &[Node]) -> usize {
    let mut memo: HashMap<(usize, u64), usize> = HashMap::new();
    (0..nodes.len())
        .filter(|&v| !nodes[v].clean && nodes[v].enabled != 0)
        .map(|v| rounds_pending(nodes, v, nodes[v].enabled, &mut memo))
        .max()
        .unwrap_or(0)
}

fn rounds_pending(nodes: &[Node], v: usize, pending: u64, memo: &mut HashMap<(usize, u64), usize>) -> usize {
    if let Some(&x) = memo.get(&(v, pending)) {
        return x;
    }
    let mut best = 0;
    for e in &nodes[v].edges {
        let w = e.to;
        let value = if nodes[w].clean {
            1
        } else {
            let left = pending & !e.selected & nodes[w].enabled;
            if left == 0 {
                if nodes[w].enabled == 0 {
                    1
                } else {
                    1 + rounds_pending(nodes, w, nodes[w].enabled, memo)
                }
            } else {
                rounds_pending(nodes, w, left, memo)
            }
        };
        best = best.max(value);
    }
    memo.insert((v, pending), best);
    best
}
