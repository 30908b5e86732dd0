//! Anonymous simple connected undirected graphs.
//!
//! Node indices are simulation bookkeeping only. Rule guards never see them:
//! they receive neighbor states as a multiset (see [`crate::protocol::NeighborView`]).

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub type NodeId = usize;

const RANDOM_RETRIES: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("edge ({0}, {1}) has an endpoint outside [0, {2})")]
    OutOfRange(usize, usize, usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("random generation failed to produce a connected graph after {0} attempts")]
    GenerationFailed(usize),
    #[error("malformed graph file: {0}")]
    Malformed(String),
    #[error("cannot read graph file: {0}")]
    Io(String),
}

/// Immutable connected simple graph with precomputed all-pairs distances.
#[derive(Clone, PartialEq, Eq)]
pub struct Topology {
    adjacency: Vec<Vec<NodeId>>,
    edges: Vec<(NodeId, NodeId)>,
    distances: Vec<Vec<usize>>,
    diameter: usize,
}

impl fmt::Debug for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Topology")
            .field("n", &self.n())
            .field("edges", &self.edges)
            .finish()
    }
}

impl Topology {
    pub fn new(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, TopologyError> {
        if n == 0 {
            return Err(TopologyError::Empty);
        }
        let mut seen = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(TopologyError::OutOfRange(u, v, n));
            }
            if u == v {
                return Err(TopologyError::SelfLoop(u));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(TopologyError::DuplicateEdge(key.0, key.1));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        let distances: Vec<Vec<usize>> = (0..n).map(|s| bfs(&adjacency, s)).collect();
        if distances[0].iter().any(|&d| d == usize::MAX) {
            return Err(TopologyError::Disconnected);
        }
        let diameter = distances
            .iter()
            .flat_map(|row| row.iter().copied())
            .max()
            .unwrap_or(0);
        Ok(Self {
            adjacency,
            edges: seen.into_iter().collect(),
            distances,
            diameter,
        })
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, p: NodeId) -> &[NodeId] {
        &self.adjacency[p]
    }

    /// Normalized edge list, each pair `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn distance(&self, u: NodeId, v: NodeId) -> usize {
        self.distances[u][v]
    }

    pub fn diameter(&self) -> usize {
        self.diameter
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.n()
    }

    pub fn path(n: usize) -> Result<Self, TopologyError> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges)
    }

    pub fn ring(n: usize) -> Result<Self, TopologyError> {
        if n < 3 {
            return Err(TopologyError::InvalidParams(format!(
                "ring needs at least 3 nodes, got {n}"
            )));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::new(n, &edges)
    }

    /// Star with center 0.
    pub fn star(n: usize) -> Result<Self, TopologyError> {
        let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
        Self::new(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Self, TopologyError> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::new(n, &edges)
    }

    pub fn grid(rows: usize, cols: usize) -> Result<Self, TopologyError> {
        if rows == 0 || cols == 0 {
            return Err(TopologyError::InvalidParams(format!(
                "grid dimensions must be positive, got {rows}x{cols}"
            )));
        }
        let id = |r: usize, c: usize| r * cols + c;
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push((id(r, c), id(r, c + 1)));
                }
                if r + 1 < rows {
                    edges.push((id(r, c), id(r + 1, c)));
                }
            }
        }
        Self::new(rows * cols, &edges)
    }

    /// Uniformly samples `m` distinct edges, retrying until the result is connected.
    pub fn random_connected(n: usize, m: usize, seed: u64) -> Result<Self, TopologyError> {
        if n == 0 {
            return Err(TopologyError::Empty);
        }
        let max_edges = n * (n - 1) / 2;
        if m + 1 < n || m > max_edges {
            return Err(TopologyError::InvalidParams(format!(
                "random graph on {n} nodes needs {} <= m <= {max_edges}, got {m}",
                n - 1
            )));
        }
        let mut all = Vec::with_capacity(max_edges);
        for u in 0..n {
            for v in u + 1..n {
                all.push((u, v));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..RANDOM_RETRIES {
            all.shuffle(&mut rng);
            match Self::new(n, &all[..m]) {
                Ok(t) => return Ok(t),
                Err(TopologyError::Disconnected) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(TopologyError::GenerationFailed(RANDOM_RETRIES))
    }

    pub fn generate(kind: &GraphKind, seed: u64) -> Result<Self, TopologyError> {
        match *kind {
            GraphKind::Path(n) => Self::path(n),
            GraphKind::Ring(n) => Self::ring(n),
            GraphKind::Star(n) => Self::star(n),
            GraphKind::Complete(n) => Self::complete(n),
            GraphKind::Grid(r, c) => Self::grid(r, c),
            GraphKind::RandomConnected { n, m } => Self::random_connected(n, m, seed),
        }
    }

    /// Parses the `n m` header followed by `m` lines of `u v`.
    pub fn parse_graph_file(text: &str) -> Result<Self, TopologyError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| TopologyError::Malformed("missing `n m` header".into()))?;
        let (n, m) = parse_pair(header)?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let line = lines.next().ok_or_else(|| {
                TopologyError::Malformed(format!("expected {m} edge lines, got {}", edges.len()))
            })?;
            edges.push(parse_pair(line)?);
        }
        if let Some(extra) = lines.next() {
            return Err(TopologyError::Malformed(format!("trailing line `{extra}`")));
        }
        Self::new(n, &edges)
    }

    pub fn to_graph_file(&self) -> String {
        let mut out = format!("{} {}\n", self.n(), self.edges.len());
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize), TopologyError> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize, TopologyError> {
        it.next()
            .ok_or_else(|| TopologyError::Malformed(format!("expected two integers in `{line}`")))?
            .parse()
            .map_err(|_| TopologyError::Malformed(format!("bad integer in `{line}`")))
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(TopologyError::Malformed(format!("extra tokens in `{line}`")));
    }
    Ok((a, b))
}

fn bfs(adjacency: &[Vec<NodeId>], source: NodeId) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adjacency.len()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Generator families accepted by `gen:KIND:PARAMS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Path(usize),
    Ring(usize),
    Star(usize),
    Complete(usize),
    Grid(usize, usize),
    RandomConnected { n: usize, m: usize },
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Path(n) => write!(f, "path:{n}"),
            GraphKind::Ring(n) => write!(f, "ring:{n}"),
            GraphKind::Star(n) => write!(f, "star:{n}"),
            GraphKind::Complete(n) => write!(f, "complete:{n}"),
            GraphKind::Grid(r, c) => write!(f, "grid:{r}x{c}"),
            GraphKind::RandomConnected { n, m } => write!(f, "random:{n}:{m}"),
        }
    }
}

impl FromStr for GraphKind {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TopologyError::InvalidParams(format!("unrecognized generator `{s}`"));
        let num = |x: &str| x.parse::<usize>().map_err(|_| bad());
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["path", n] => Ok(GraphKind::Path(num(n)?)),
            ["ring", n] => Ok(GraphKind::Ring(num(n)?)),
            ["star", n] => Ok(GraphKind::Star(num(n)?)),
            ["complete", n] => Ok(GraphKind::Complete(num(n)?)),
            ["grid", dims] => {
                let (r, c) = dims.split_once('x').ok_or_else(bad)?;
                Ok(GraphKind::Grid(num(r)?, num(c)?))
            }
            ["random" | "random_connected", n, m] => Ok(GraphKind::RandomConnected {
                n: num(n)?,
                m: num(m)?,
            }),
            _ => Err(bad()),
        }
    }
}

/// Where a topology comes from: `file:PATH` or `gen:KIND:PARAMS`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphSource {
    File(String),
    Generated(GraphKind),
}

impl FromStr for GraphSource {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(path) = s.strip_prefix("file:") {
            Ok(GraphSource::File(path.to_string()))
        } else if let Some(spec) = s.strip_prefix("gen:") {
            Ok(GraphSource::Generated(spec.parse()?))
        } else {
            Err(TopologyError::InvalidParams(format!(
                "graph source must start with `file:` or `gen:`, got `{s}`"
            )))
        }
    }
}

impl GraphSource {
    pub fn load(&self, seed: u64) -> Result<Topology, TopologyError> {
        match self {
            GraphSource::File(path) => {
                let text = std::fs::read_to_string(Path::new(path))
                    .map_err(|e| TopologyError::Io(format!("{path}: {e}")))?;
                Topology::parse_graph_file(&text)
            }
            GraphSource::Generated(kind) => Topology::generate(kind, seed),
        }
    }
}
