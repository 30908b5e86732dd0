//! Round accounting by neutralization, computed after the fact from a trace.

use crate::protocol::{enabled_rules, Protocol};
use crate::trace::Trace;

/// Per configuration, which nodes are enabled.
pub fn enabled_flags<P: Protocol>(proto: &P, trace: &Trace<P::State>) -> Vec<Vec<bool>> {
    let t = trace.topology();
    trace
        .configs()
        .map(|cfg| {
            enabled_rules(proto, cfg, t, trace.period())
                .into_iter()
                .map(|r| r.is_some())
                .collect()
        })
        .collect()
}

/// Configuration indices `h_1 < h_2 < ...` closing each round of the suffix
/// that starts at configuration `start`.
///
/// A round tracks the nodes enabled at its first configuration and drops a
/// node when it fires or is neutralized (enabled before a step, disabled
/// after, without firing). The round closes when none are left. A round
/// starting at a terminal configuration is empty and produces no boundary.
pub fn boundaries_from(enabled: &[Vec<bool>], selections: &[&[usize]], start: usize) -> Vec<usize> {
    debug_assert_eq!(enabled.len(), selections.len() + 1);
    let mut boundaries = Vec::new();
    let mut pending: Vec<usize> = Vec::new();
    let mut open = false;
    for k in start..selections.len() {
        if !open {
            pending = (0..enabled[k].len()).filter(|&p| enabled[k][p]).collect();
            if pending.is_empty() {
                break;
            }
            open = true;
        }
        let sel = selections[k];
        let after = &enabled[k + 1];
        pending.retain(|&p| !sel.contains(&p) && after[p]);
        if pending.is_empty() {
            boundaries.push(k + 1);
            open = false;
        }
    }
    boundaries
}

pub fn round_boundaries<P: Protocol>(proto: &P, trace: &Trace<P::State>) -> Vec<usize> {
    round_boundaries_from(proto, trace, 0)
}

pub fn round_boundaries_from<P: Protocol>(proto: &P, trace: &Trace<P::State>, start: usize) -> Vec<usize> {
    let enabled = enabled_flags(proto, trace);
    let selections: Vec<&[usize]> = trace.steps.iter().map(|s| s.selected.as_slice()).collect();
    boundaries_from(&enabled, &selections, start)
}

/// Number of rounds (counted from `start`) needed to reach configuration
/// `target`: the smallest `k` with `h_k >= target`, where `h_0 = start`. A
/// target inside the trailing unfinished round counts that round.
pub fn rounds_to_reach(boundaries: &[usize], start: usize, target: usize) -> usize {
    if target <= start {
        return 0;
    }
    match boundaries.iter().position(|&h| h >= target) {
        Some(k) => k + 1,
        None => boundaries.len() + 1,
    }
}
