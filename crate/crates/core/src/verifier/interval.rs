//! Clock-value structure of almost-clean configurations.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::clock::{Clock, NodeState, Period};

/// Smallest value in `[0, B)` that no clock takes.
pub fn find_hole(cfg: &[NodeState], period: Period) -> Option<Clock> {
    let used: BTreeSet<Clock> = cfg.iter().map(|s| s.clock).collect();
    (0..period.get()).find(|c| !used.contains(c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClockInterval {
    pub c_min: Clock,
    /// The clock set is `{c_min +_B i : 0 <= i <= span}` when `exact` holds.
    pub span: usize,
    pub exact: bool,
}

/// Candidate interval of the clock set: `c_min` is the smallest clock when
/// some clock is negative, otherwise the first clock met walking `+_B` from a
/// hole. `span` is how far the walk continues through present values.
/// `None` when all non-negative clocks leave no hole.
pub fn color_interval(cfg: &[NodeState], period: Period) -> Option<ClockInterval> {
    let used: BTreeSet<Clock> = cfg.iter().map(|s| s.clock).collect();
    let min = *used.iter().next()?;
    let c_min = if min < 0 {
        min
    } else {
        let hole = find_hole(cfg, period)?;
        let mut c = hole;
        while !used.contains(&c) {
            c = period.increment(c);
        }
        c
    };
    let mut span = 0;
    let mut c = c_min;
    let mut covered = BTreeSet::from([c_min]);
    loop {
        let next = period.increment(c);
        if !used.contains(&next) || covered.contains(&next) {
            break;
        }
        covered.insert(next);
        span += 1;
        c = next;
    }
    Some(ClockInterval {
        c_min,
        span,
        exact: covered == used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(clocks: &[Clock]) -> Vec<NodeState> {
        clocks.iter().map(|&c| NodeState::correct(c)).collect()
    }

    fn b(x: i32) -> Period {
        Period::new(x).unwrap()
    }

    #[test]
    fn holes() {
        assert_eq!(find_hole(&cfg(&[0, 1, 2, 3]), b(4)), None);
        assert_eq!(find_hole(&cfg(&[0, 1, 3]), b(4)), Some(2));
        assert_eq!(find_hole(&cfg(&[-4, -3]), b(4)), Some(0));
    }

    #[test]
    fn negative_and_wrapping_intervals() {
        let neg = color_interval(&cfg(&[-2, -1, 0, -2]), b(6)).unwrap();
        assert_eq!(neg, ClockInterval { c_min: -2, span: 2, exact: true });
        let wrap = color_interval(&cfg(&[5, 0, 1]), b(6)).unwrap();
        assert_eq!(wrap, ClockInterval { c_min: 5, span: 2, exact: true });
        let flat = color_interval(&cfg(&[3, 3]), b(6)).unwrap();
        assert_eq!(flat, ClockInterval { c_min: 3, span: 0, exact: true });
        let gap = color_interval(&cfg(&[1, 3]), b(6)).unwrap();
        assert!(!gap.exact);
    }

    #[test]
    fn negative_tail_joined_to_wrapped_values_is_not_an_interval() {
        // Both -1 and B-1 step to 0, so no single walk covers the set.
        let mixed = color_interval(&cfg(&[-1, 0, 5]), b(6)).unwrap();
        assert_eq!(mixed, ClockInterval { c_min: -1, span: 1, exact: false });
    }
}
