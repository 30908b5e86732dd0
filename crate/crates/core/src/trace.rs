//! Execution traces and their JSON Lines encoding.
//!
//! Line 1 is a header `{version, n, edges, B, init, daemon, paux, seed}`
//! (plus `alg` for synchronizer traces), then one object per step
//! `{i, sel, fired, post}`, then a final `{termination}` line. Replaying the
//! header reproduces every step exactly.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::clock::{NodeState, Period};
use crate::protocol::HasUnison;
use crate::rules::Rule;
use crate::scheduler::DaemonStrategy;
use crate::topology::{NodeId, Topology};

pub const TRACE_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceHeader {
    pub topology: Topology,
    pub period: Period,
    pub daemon: DaemonStrategy,
    /// `P_aux` descriptor: `true`, `false`, `custom`, `greedy` or `lazy`.
    pub aux: String,
    pub seed: u64,
    pub algorithm: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord<S> {
    pub index: usize,
    pub selected: Vec<NodeId>,
    pub fired: Vec<(NodeId, Rule)>,
    pub post: Vec<S>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Terminal,
    StepLimit,
    CleanReachedAndStopped,
    ScriptInvalid { step: usize, node: Option<NodeId> },
    ScriptExhausted,
    /// A configuration repeated along an enumerated path.
    CycleDetected,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::ScriptInvalid { step, node: Some(p) } => {
                write!(f, "ScriptInvalid(step {step}, node {p})")
            }
            Termination::ScriptInvalid { step, node: None } => write!(f, "ScriptInvalid(step {step})"),
            other => write!(f, "{other:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace<S> {
    pub header: TraceHeader,
    pub init: Vec<S>,
    pub steps: Vec<StepRecord<S>>,
    pub termination: Termination,
}

impl<S> Trace<S> {
    /// Configuration `i`; index 0 is the initial configuration.
    pub fn config(&self, i: usize) -> &[S] {
        if i == 0 {
            &self.init
        } else {
            &self.steps[i - 1].post
        }
    }

    pub fn num_configs(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn configs(&self) -> impl Iterator<Item = &[S]> + '_ {
        std::iter::once(self.init.as_slice()).chain(self.steps.iter().map(|s| s.post.as_slice()))
    }

    pub fn last_config(&self) -> &[S] {
        self.config(self.steps.len())
    }

    pub fn topology(&self) -> &Topology {
        &self.header.topology
    }

    pub fn period(&self) -> Period {
        self.header.period
    }

    pub fn total_moves(&self) -> usize {
        self.steps.iter().map(|s| s.fired.len()).sum()
    }
}

impl<S: HasUnison> Trace<S> {
    /// The unison projection of every configuration.
    pub fn unison_configs(&self) -> Vec<Vec<NodeState>> {
        self.configs()
            .map(|c| c.iter().map(HasUnison::unison).collect())
            .collect()
    }
}

/// Node states that can be written to and read from trace files.
pub trait TraceState: Sized {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self, String>;
}

impl TraceState for NodeState {
    fn to_json(&self) -> Value {
        json!([self.status.to_string(), self.clock])
    }

    fn from_json(v: &Value) -> Result<Self, String> {
        let arr = v.as_array().ok_or("node state must be an array")?;
        if arr.len() != 2 {
            return Err(format!("expected [status, clock], got {v}"));
        }
        unison_from_json(arr)
    }
}

/// Reads the leading `[status, clock, ...]` entries of a state tuple.
pub fn unison_from_json(arr: &[Value]) -> Result<NodeState, String> {
    let status = arr
        .first()
        .and_then(Value::as_str)
        .ok_or("missing status")?
        .parse()?;
    let clock = arr
        .get(1)
        .and_then(Value::as_i64)
        .ok_or("missing integer clock")?;
    let clock = i32::try_from(clock).map_err(|_| format!("clock {clock} out of range"))?;
    Ok(NodeState { status, clock })
}

pub fn rule_to_json(p: NodeId, r: Rule) -> Value {
    match r {
        Rule::RP(i) => json!([p, "RP", i]),
        other => json!([p, other.label()]),
    }
}

fn rule_from_json(v: &Value) -> Result<(NodeId, Rule), String> {
    let arr = v.as_array().ok_or("fired entry must be an array")?;
    let node = arr.first().and_then(Value::as_u64).ok_or("fired entry missing node")? as NodeId;
    let label = arr.get(1).and_then(Value::as_str).ok_or("fired entry missing rule")?;
    let rule = match (label, arr.len()) {
        ("RR", 2) => Rule::RR,
        ("RC", 2) => Rule::RC,
        ("RU", 2) => Rule::RU,
        ("RP", 3) => {
            let target = arr[2].as_i64().ok_or("RP target must be an integer")?;
            Rule::RP(i32::try_from(target).map_err(|_| "RP target out of range")?)
        }
        _ => return Err(format!("bad fired entry {v}")),
    };
    Ok((node, rule))
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("trace is truncated: {0}")]
    Truncated(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

fn malformed(line: usize, msg: impl Into<String>) -> TraceError {
    TraceError::Malformed { line, msg: msg.into() }
}

#[derive(Debug, Serialize, Deserialize)]
struct HeaderLine {
    version: u64,
    n: usize,
    edges: Vec<(NodeId, NodeId)>,
    #[serde(rename = "B")]
    period: i32,
    init: Vec<Value>,
    daemon: String,
    paux: String,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alg: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct StepLine {
    i: usize,
    sel: Vec<NodeId>,
    fired: Vec<Value>,
    post: Vec<Value>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TerminationLine {
    termination: Termination,
}

pub fn write_jsonl<S: TraceState>(trace: &Trace<S>, mut w: impl Write) -> io::Result<()> {
    let h = &trace.header;
    let header = HeaderLine {
        version: TRACE_VERSION,
        n: h.topology.n(),
        edges: h.topology.edges().to_vec(),
        period: h.period.get(),
        init: trace.init.iter().map(TraceState::to_json).collect(),
        daemon: h.daemon.to_string(),
        paux: h.aux.clone(),
        seed: h.seed,
        alg: h.algorithm.clone(),
    };
    serde_json::to_writer(&mut w, &header)?;
    writeln!(w)?;
    for step in &trace.steps {
        let line = StepLine {
            i: step.index,
            sel: step.selected.clone(),
            fired: step.fired.iter().map(|&(p, r)| rule_to_json(p, r)).collect(),
            post: step.post.iter().map(TraceState::to_json).collect(),
        };
        serde_json::to_writer(&mut w, &line)?;
        writeln!(w)?;
    }
    serde_json::to_writer(&mut w, &TerminationLine { termination: trace.termination })?;
    writeln!(w)
}

pub fn to_jsonl_string<S: TraceState>(trace: &Trace<S>) -> String {
    let mut buf = Vec::new();
    write_jsonl(trace, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// `paux` and `alg` header fields, used to pick the decoder.
pub fn peek_protocol(text: &str) -> Result<(String, Option<String>), TraceError> {
    let first = text
        .lines()
        .next()
        .ok_or_else(|| TraceError::Truncated("empty file".into()))?;
    let header: HeaderLine = serde_json::from_str(first).map_err(|e| malformed(1, e.to_string()))?;
    Ok((header.paux, header.alg))
}

pub fn read_jsonl<S: TraceState>(text: &str) -> Result<Trace<S>, TraceError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines
        .next()
        .ok_or_else(|| TraceError::Truncated("empty file".into()))?;
    let h: HeaderLine = serde_json::from_str(first).map_err(|e| malformed(1, e.to_string()))?;
    if h.version != TRACE_VERSION {
        return Err(malformed(1, format!("unsupported version {}", h.version)));
    }
    let topology = Topology::new(h.n, &h.edges).map_err(|e| malformed(1, e.to_string()))?;
    let period = Period::for_topology(h.period, &topology).map_err(|e| malformed(1, e.to_string()))?;
    let daemon = h.daemon.parse().map_err(|e: crate::scheduler::DaemonParseError| malformed(1, e.to_string()))?;
    let decode_cfg = |line: usize, vals: &[Value]| -> Result<Vec<S>, TraceError> {
        if vals.len() != h.n {
            return Err(malformed(line, format!("expected {} node states, got {}", h.n, vals.len())));
        }
        vals.iter()
            .map(|v| S::from_json(v).map_err(|e| malformed(line, e)))
            .collect()
    };
    let init = decode_cfg(1, &h.init)?;
    let header = TraceHeader {
        topology,
        period,
        daemon,
        aux: h.paux.clone(),
        seed: h.seed,
        algorithm: h.alg.clone(),
    };
    let mut steps = Vec::new();
    for (k, line) in lines {
        let lineno = k + 1;
        let value: Value = serde_json::from_str(line).map_err(|e| malformed(lineno, e.to_string()))?;
        if value.get("termination").is_some() {
            let t: TerminationLine = serde_json::from_value(value).map_err(|e| malformed(lineno, e.to_string()))?;
            return Ok(Trace {
                header,
                init,
                steps,
                termination: t.termination,
            });
        }
        let step: StepLine = serde_json::from_value(value).map_err(|e| malformed(lineno, e.to_string()))?;
        if step.i != steps.len() {
            return Err(malformed(lineno, format!("expected step {}, got {}", steps.len(), step.i)));
        }
        if step.sel.iter().any(|&p| p >= h.n) {
            return Err(malformed(lineno, "selected node out of range"));
        }
        let fired = step
            .fired
            .iter()
            .map(rule_from_json)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| malformed(lineno, e))?;
        steps.push(StepRecord {
            index: step.i,
            selected: step.sel,
            fired,
            post: decode_cfg(lineno, &step.post)?,
        });
    }
    Err(TraceError::Truncated("missing termination line".into()))
}
