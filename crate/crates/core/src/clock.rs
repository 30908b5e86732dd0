//! Bounded clocks, the period `B`, and per-node `(status, clock)` states.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::topology::Topology;

pub type Clock = i32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PeriodError {
    #[error("period {got} is below the minimum {min} (max(4, 2D+2) with D = {diameter})")]
    TooSmall { got: i32, min: i32, diameter: usize },
}

/// The clock period `B`. Clocks live in `[-B, B)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Period(i32);

impl Period {
    /// Smallest period accepted for a topology of diameter `d`.
    pub fn minimum_for_diameter(d: usize) -> i32 {
        (2 * d as i32 + 2).max(4)
    }

    /// Checks `B >= max(4, 2D+2)` against the diameter of `t`.
    pub fn for_topology(b: i32, t: &Topology) -> Result<Self, PeriodError> {
        Self::for_diameter(b, t.diameter())
    }

    pub fn for_diameter(b: i32, diameter: usize) -> Result<Self, PeriodError> {
        let min = Self::minimum_for_diameter(diameter);
        if b < min {
            return Err(PeriodError::TooSmall { got: b, min, diameter });
        }
        Ok(Self(b))
    }

    /// `2D+2`, floored at 4.
    pub fn auto(t: &Topology) -> Self {
        Self(Self::minimum_for_diameter(t.diameter()))
    }

    /// Period without a topology attached; only enforces `B >= 4`.
    pub fn new(b: i32) -> Result<Self, PeriodError> {
        Self::for_diameter(b, 0)
    }

    pub fn get(self) -> i32 {
        self.0
    }

    pub fn floor(self) -> Clock {
        -self.0
    }

    pub fn contains(self, c: Clock) -> bool {
        (-self.0..self.0).contains(&c)
    }

    /// `c +_B 1`: wraps only at `B-1`. Negative clocks never wrap.
    pub fn increment(self, c: Clock) -> Clock {
        debug_assert!(self.contains(c));
        if c == self.0 - 1 {
            0
        } else {
            c + 1
        }
    }

    /// `c +_B m`, as `m` applications of [`Period::increment`].
    pub fn add(self, c: Clock, m: usize) -> Clock {
        (0..m).fold(c, |acc, _| self.increment(acc))
    }

    /// Clock distance: 0 when equal, 1 when one is the `+_B 1` successor of
    /// the other, 2 otherwise.
    pub fn dist(self, a: Clock, b: Clock) -> u8 {
        if a == b {
            0
        } else if self.increment(a) == b || self.increment(b) == a {
            1
        } else {
            2
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    /// Correct.
    C,
    /// Erroneous.
    E,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::C => "C",
            Status::E => "E",
        })
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "C" => Ok(Status::C),
            "E" => Ok(Status::E),
            other => Err(format!("unknown status `{other}`")),
        }
    }
}

/// One node's unison variable: a `(status, clock)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeState {
    pub status: Status,
    pub clock: Clock,
}

impl NodeState {
    pub const fn correct(clock: Clock) -> Self {
        Self { status: Status::C, clock }
    }

    pub const fn error(clock: Clock) -> Self {
        Self { status: Status::E, clock }
    }

    pub fn is_correct(&self) -> bool {
        self.status == Status::C
    }

    pub fn is_error(&self) -> bool {
        self.status == Status::E
    }

    /// Membership in the `Pairs` domain: correct clocks in `[-B, B)`,
    /// erroneous clocks in `[-B, 0)`.
    pub fn in_domain(&self, period: Period) -> bool {
        match self.status {
            Status::C => period.contains(self.clock),
            Status::E => (period.floor()..0).contains(&self.clock),
        }
    }

    /// Every domain-valid state for `period`, correct states first.
    pub fn all(period: Period) -> impl Iterator<Item = NodeState> {
        let b = period.get();
        (-b..b)
            .map(NodeState::correct)
            .chain((-b..0).map(NodeState::error))
    }
}

impl fmt::Display for NodeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.status, self.clock)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(b: i32) -> Period {
        Period::new(b).unwrap()
    }

    #[test]
    fn increment_wraps_only_at_top() {
        assert_eq!(p(8).increment(7), 0);
        assert_eq!(p(8).increment(3), 4);
        assert_eq!(p(8).increment(-8), -7);
        assert_eq!(p(8).increment(-1), 0);
        assert_eq!(p(8).add(6, 3), 1);
        assert_eq!(p(8).add(-8, 0), -8);
    }

    #[test]
    fn clock_distance() {
        assert_eq!(p(8).dist(5, 5), 0);
        assert_eq!(p(8).dist(7, 0), 1);
        assert_eq!(p(8).dist(0, 7), 1);
        assert_eq!(p(8).dist(2, 5), 2);
        assert_eq!(p(8).dist(-1, 0), 1);
        // -8 and 7 are not successors of each other.
        assert_eq!(p(8).dist(-8, 7), 2);
    }

    #[test]
    fn period_bounds() {
        let path = Topology::path(4).unwrap();
        assert!(Period::for_topology(7, &path).is_err());
        assert_eq!(Period::for_topology(8, &path).unwrap().get(), 8);
        assert_eq!(Period::auto(&path).get(), 8);
        assert_eq!(Period::auto(&Topology::path(1).unwrap()).get(), 4);
        assert!(Period::new(3).is_err());
    }

    #[test]
    fn domain() {
        let b = p(6);
        assert!(NodeState::correct(-6).in_domain(b));
        assert!(NodeState::correct(5).in_domain(b));
        assert!(!NodeState::correct(6).in_domain(b));
        assert!(NodeState::error(-1).in_domain(b));
        assert!(!NodeState::error(0).in_domain(b));
        assert!(!NodeState::error(-7).in_domain(b));
        assert_eq!(NodeState::all(b).count(), 18);
        assert!(NodeState::all(b).all(|s| s.in_domain(b)));
    }
}
