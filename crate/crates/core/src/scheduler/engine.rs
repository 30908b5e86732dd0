use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::clock::{Period, PeriodError};
use crate::config::validate_configuration;
use crate::protocol::{apply_step, enabled_set, HasUnison, Protocol};
use crate::scheduler::daemon::{DaemonStrategy, Selection};
use crate::topology::{NodeId, Topology};
use crate::trace::{StepRecord, Termination, Trace, TraceHeader};
use crate::verifier::is_clean;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopOn {
    Terminal,
    /// Stop at the first clean configuration.
    Clean,
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_steps: usize,
    pub stop_on: StopOn,
    /// Extra steps taken after the `stop_on` condition first holds.
    pub linger: usize,
}

impl Limits {
    pub fn new(max_steps: usize, stop_on: StopOn) -> Self {
        Self {
            max_steps,
            stop_on,
            linger: 0,
        }
    }

    pub fn lingering(mut self, linger: usize) -> Self {
        self.linger = linger;
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RunError {
    #[error("invalid period: {0}")]
    InvalidPeriod(#[from] PeriodError),
    #[error("initial configuration has {got} nodes, topology has {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("initial configuration outside the Pairs domain at nodes {0:?}")]
    InvalidInitialConfiguration(Vec<NodeId>),
    #[error("the exhaustive daemon cannot drive a single execution")]
    ExhaustiveDaemon,
}

pub(crate) fn check_inputs<S: HasUnison>(t: &Topology, period: Period, init: &[S]) -> Result<(), RunError> {
    Period::for_topology(period.get(), t)?;
    if init.len() != t.n() {
        return Err(RunError::WrongLength {
            got: init.len(),
            expected: t.n(),
        });
    }
    let unison: Vec<_> = init.iter().map(HasUnison::unison).collect();
    validate_configuration(&unison, period)
        .map_err(|bad| RunError::InvalidInitialConfiguration(bad.into_iter().map(|(p, _)| p).collect()))
}

fn stop_reached<S: HasUnison>(stop_on: StopOn, cfg: &[S], t: &Topology, period: Period) -> bool {
    match stop_on {
        StopOn::Clean => {
            let unison: Vec<_> = cfg.iter().map(HasUnison::unison).collect();
            is_clean(&unison, t, period)
        }
        StopOn::Terminal | StopOn::Never => false,
    }
}

/// Runs one execution: enabled set, daemon selection, atomic step, until the
/// configuration is terminal, the stop condition holds (plus `linger` steps),
/// or `max_steps` is reached. Deterministic in `seed`.
pub fn run_execution<P: Protocol>(
    proto: &P,
    t: &Topology,
    period: Period,
    init: Vec<P::State>,
    daemon: &DaemonStrategy,
    limits: Limits,
    seed: u64,
) -> Result<Trace<P::State>, RunError> {
    check_inputs(t, period, &init)?;
    if *daemon == DaemonStrategy::Exhaustive {
        return Err(RunError::ExhaustiveDaemon);
    }
    let header = TraceHeader {
        topology: t.clone(),
        period,
        daemon: daemon.clone(),
        aux: proto.aux_label(),
        seed,
        algorithm: proto.algorithm_label(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps: Vec<StepRecord<P::State>> = Vec::new();
    let mut cfg = init.clone();
    let mut stop_countdown = stop_reached(limits.stop_on, &cfg, t, period).then_some(limits.linger);
    let termination = loop {
        if stop_countdown == Some(0) {
            break Termination::CleanReachedAndStopped;
        }
        let enabled = enabled_set(proto, &cfg, t, period);
        if enabled.is_empty() {
            break Termination::Terminal;
        }
        if steps.len() >= limits.max_steps {
            break Termination::StepLimit;
        }
        let index = steps.len();
        let selected = match daemon.select(&enabled, index, &mut rng) {
            Selection::Nodes(sel) => sel,
            Selection::ScriptInvalid(node) => break Termination::ScriptInvalid { step: index, node },
            Selection::ScriptExhausted => break Termination::ScriptExhausted,
        };
        let (next, fired) = apply_step(proto, &cfg, t, period, &selected)
            .expect("daemon selections are subsets of the enabled set");
        steps.push(StepRecord {
            index,
            selected,
            fired,
            post: next.clone(),
        });
        cfg = next;
        stop_countdown = match stop_countdown {
            Some(k) => Some(k - 1),
            None => stop_reached(limits.stop_on, &cfg, t, period).then_some(limits.linger),
        };
    };
    Ok(Trace {
        header,
        init,
        steps,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::NodeState;
    use crate::protocol::{AuxPredicate, Unison};
    use crate::rules::Rule;

    fn single_error() -> (Topology, Period, Vec<NodeState>) {
        let t = Topology::path(1).unwrap();
        (t, Period::new(4).unwrap(), vec![NodeState::error(-4)])
    }

    #[test]
    fn single_node_clears_then_counts() {
        let (t, b, init) = single_error();
        let u = Unison::greedy();
        let trace = run_execution(&u, &t, b, init.clone(), &DaemonStrategy::Synchronous, Limits::new(6, StopOn::Never), 0).unwrap();
        let rules: Vec<Rule> = trace.steps.iter().map(|s| s.fired[0].1).collect();
        assert_eq!(rules, vec![Rule::RC, Rule::RU, Rule::RU, Rule::RU, Rule::RU, Rule::RU]);
        assert_eq!(trace.termination, Termination::StepLimit);
        let clocks: Vec<_> = trace.configs().map(|c| c[0].clock).collect();
        assert_eq!(clocks, vec![-4, -4, -3, -2, -1, 0, 1]);

        let stopped = run_execution(&u, &t, b, init, &DaemonStrategy::Synchronous, Limits::new(6, StopOn::Clean), 0).unwrap();
        assert_eq!(stopped.steps.len(), 1);
        assert_eq!(stopped.steps[0].fired, vec![(0, Rule::RC)]);
        assert_eq!(stopped.termination, Termination::CleanReachedAndStopped);
    }

    #[test]
    fn lingers_after_clean() {
        let (t, b, init) = single_error();
        let trace = run_execution(
            &Unison::greedy(),
            &t,
            b,
            init,
            &DaemonStrategy::Synchronous,
            Limits::new(100, StopOn::Clean).lingering(3),
            0,
        )
        .unwrap();
        assert_eq!(trace.steps.len(), 4);
        assert_eq!(trace.termination, Termination::CleanReachedAndStopped);
    }

    #[test]
    fn synchronous_ring_counts_up() {
        let t = Topology::ring(3).unwrap();
        let b = Period::new(8).unwrap();
        let trace = run_execution(
            &Unison::greedy(),
            &t,
            b,
            vec![NodeState::correct(-8); 3],
            &DaemonStrategy::Synchronous,
            Limits::new(5, StopOn::Never),
            0,
        )
        .unwrap();
        assert_eq!(trace.steps.len(), 5);
        for (k, step) in trace.steps.iter().enumerate() {
            assert!(step.fired.iter().all(|(_, r)| *r == Rule::RU));
            assert_eq!(step.post, vec![NodeState::correct(-7 + k as i32); 3]);
        }
    }

    #[test]
    fn lazy_single_node_terminates() {
        let (t, b, init) = single_error();
        let trace = run_execution(
            &Unison::with_aux(AuxPredicate::AlwaysFalse),
            &t,
            b,
            init,
            &DaemonStrategy::CentralRandom,
            Limits::new(100, StopOn::Terminal),
            4,
        )
        .unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.termination, Termination::Terminal);
    }

    #[test]
    fn invalid_script_is_a_termination_reason() {
        let b = Period::new(6).unwrap();
        let path = Topology::path(3).unwrap();
        let daemon = DaemonStrategy::Scripted(vec![vec![0], vec![0]]);
        // After its first increment node 0 waits for node 1, so the second entry is invalid.
        let trace = run_execution(
            &Unison::greedy(),
            &path,
            b,
            vec![NodeState::correct(0); 3],
            &daemon,
            Limits::new(10, StopOn::Never),
            0,
        )
        .unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.termination, Termination::ScriptInvalid { step: 1, node: Some(0) });
    }

    #[test]
    fn rejects_bad_inputs() {
        let t = Topology::path(3).unwrap();
        let u = Unison::greedy();
        let small = Period::new(4).unwrap();
        assert!(matches!(
            run_execution(&u, &t, small, vec![NodeState::correct(0); 3], &DaemonStrategy::Synchronous, Limits::new(1, StopOn::Never), 0),
            Err(RunError::InvalidPeriod(_))
        ));
        let b = Period::new(6).unwrap();
        assert_eq!(
            run_execution(&u, &t, b, vec![NodeState::correct(0), NodeState::error(0), NodeState::correct(0)], &DaemonStrategy::Synchronous, Limits::new(1, StopOn::Never), 0),
            Err(RunError::InvalidInitialConfiguration(vec![1]))
        );
    }

    #[test]
    fn deterministic_in_seed() {
        let t = Topology::ring(5).unwrap();
        let b = Period::auto(&t);
        let init = vec![NodeState::correct(3), NodeState::error(-2), NodeState::correct(-6), NodeState::correct(5), NodeState::error(-1)];
        let d = DaemonStrategy::DistributedRandom(0.5);
        let run = |seed| run_execution(&Unison::greedy(), &t, b, init.clone(), &d, Limits::new(50, StopOn::Never), seed).unwrap();
        assert_eq!(run(11), run(11));
    }
}
