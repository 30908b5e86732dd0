//! Configurations: validation, the one-state-per-line text format, and
//! initial-configuration sources.

use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::clock::{Clock, NodeState, Period};
use crate::topology::NodeId;

pub type Configuration = Vec<NodeState>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("configuration has {got} nodes, topology has {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("nodes outside the Pairs domain: {0:?}")]
    Domain(Vec<(NodeId, NodeState)>),
    #[error("unknown init source `{0}`")]
    UnknownSource(String),
    #[error("cannot read configuration file: {0}")]
    Io(String),
}

/// Every node whose state lies outside the `Pairs` domain.
pub fn validate_configuration(cfg: &[NodeState], period: Period) -> Result<(), Vec<(NodeId, NodeState)>> {
    let bad: Vec<_> = cfg
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.in_domain(period))
        .map(|(p, s)| (p, *s))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad)
    }
}

/// Parses lines of `C <clock>` or `E <clock>`. Blank lines and `#` comments
/// are skipped.
pub fn parse_configuration(text: &str) -> Result<Configuration, ConfigError> {
    let mut cfg = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| ConfigError::Parse { line: k + 1, msg };
        let mut it = line.split_whitespace();
        let status = it
            .next()
            .unwrap()
            .parse()
            .map_err(err)?;
        let clock: Clock = it
            .next()
            .ok_or_else(|| err("missing clock".into()))?
            .parse()
            .map_err(|_| err(format!("bad clock in `{line}`")))?;
        if it.next().is_some() {
            return Err(err(format!("trailing tokens in `{line}`")));
        }
        cfg.push(NodeState { status, clock });
    }
    Ok(cfg)
}

pub fn format_configuration(cfg: &[NodeState]) -> String {
    cfg.iter()
        .map(|s| format!("{} {}\n", s.status, s.clock))
        .collect()
}

/// Uniform draw from the `Pairs` domain.
pub fn random_state(period: Period, rng: &mut impl Rng) -> NodeState {
    let b = period.get();
    // 2B correct values followed by B erroneous values.
    let k = rng.gen_range(0..3 * b);
    if k < 2 * b {
        NodeState::correct(k - b)
    } else {
        NodeState::error(k - 3 * b)
    }
}

pub fn random_configuration(n: usize, period: Period, rng: &mut impl Rng) -> Configuration {
    (0..n).map(|_| random_state(period, rng)).collect()
}

/// All `3B^n` domain-valid configurations on `n` nodes, in lexicographic
/// order of [`NodeState::all`].
pub fn all_configurations(n: usize, period: Period) -> impl Iterator<Item = Configuration> {
    let states: Vec<NodeState> = NodeState::all(period).collect();
    let k = states.len();
    let total = k.pow(n as u32);
    (0..total).map(move |mut code| {
        let mut cfg = Vec::with_capacity(n);
        for _ in 0..n {
            cfg.push(states[code % k]);
            code /= k;
        }
        cfg
    })
}

/// Where the initial configuration comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitSource {
    File(String),
    Random,
    CleanUniform(Clock),
    AllErrorFloor,
}

impl FromStr for InitSource {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(InitSource::File(path.to_string()));
        }
        if let Some(c) = s.strip_prefix("clean-uniform:") {
            return c
                .parse()
                .map(InitSource::CleanUniform)
                .map_err(|_| ConfigError::UnknownSource(s.to_string()));
        }
        match s {
            "random" => Ok(InitSource::Random),
            "all-error-floor" => Ok(InitSource::AllErrorFloor),
            _ => Err(ConfigError::UnknownSource(s.to_string())),
        }
    }
}

impl InitSource {
    pub fn resolve(&self, n: usize, period: Period, rng: &mut impl Rng) -> Result<Configuration, ConfigError> {
        let cfg = match self {
            InitSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{path}: {e}")))?;
                parse_configuration(&text)?
            }
            InitSource::Random => random_configuration(n, period, rng),
            InitSource::CleanUniform(c) => vec![NodeState::correct(*c); n],
            InitSource::AllErrorFloor => vec![NodeState::error(period.floor()); n],
        };
        if cfg.len() != n {
            return Err(ConfigError::WrongLength {
                got: cfg.len(),
                expected: n,
            });
        }
        validate_configuration(&cfg, period).map_err(ConfigError::Domain)?;
        Ok(cfg)
    }
}
