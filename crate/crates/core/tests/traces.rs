use unison_core::explore::explore_state_space;
use unison_core::campaign::{enumerate_and_verify, small_graphs};
use unison_core::scheduler::{run_execution, DaemonStrategy, Limits, StopOn};
use unison_core::synchronizer::{alg_min_id_bfs, alg_min_propagation, verify_sim_trace, BfsState, MinIdBfs, Mode, SimNodeState, Synchronizer};
use unison_core::trace::{peek_protocol, read_jsonl, to_jsonl_string};
use unison_core::verifier::{verify_trace, VerificationStatus};
use unison_core::{AuxPredicate, NodeState, Period, Topology, Unison};

#[test]
fn unison_trace_survives_jsonl() {
    let t = Topology::grid(2, 3).unwrap();
    let period = Period::auto(&t);
    let init = vec![
        NodeState::error(-3),
        NodeState::correct(7),
        NodeState::correct(0),
        NodeState::error(-1),
        NodeState::correct(-8),
        NodeState::correct(2),
    ];
    let trace = run_execution(&Unison::greedy(), &t, period, init, &DaemonStrategy::DistributedRandom(0.5), Limits::new(500, StopOn::Clean).lingering(6), 11).unwrap();
    let text = to_jsonl_string(&trace);
    assert_eq!(peek_protocol(&text).unwrap(), ("true".to_string(), None));
    let back = read_jsonl::<NodeState>(&text).unwrap();
    assert_eq!(back, trace);
    assert_eq!(verify_trace(&Unison::greedy(), &back).status, VerificationStatus::Ok);
}

#[test]
fn lazy_unison_trace_survives_jsonl() {
    let t = Topology::ring(5).unwrap();
    let proto = Unison::with_aux(AuxPredicate::AlwaysFalse);
    let init = vec![NodeState::correct(3), NodeState::error(-2), NodeState::correct(-1), NodeState::correct(5), NodeState::error(-6)];
    let trace = run_execution(&proto, &t, Period::auto(&t), init, &DaemonStrategy::CentralRandom, Limits::new(500, StopOn::Terminal), 4).unwrap();
    let back = read_jsonl::<NodeState>(&to_jsonl_string(&trace)).unwrap();
    assert_eq!(back, trace);
    assert_eq!(verify_trace(&proto, &back).status, VerificationStatus::Ok);
}

#[test]
fn synchronizer_traces_survive_jsonl() {
    let t = Topology::star(4).unwrap();
    let period = Period::auto(&t);
    let sync = Synchronizer::new(alg_min_propagation(), Mode::Lazy);
    let init: Vec<_> = [4i64, 8, 1, 6].iter().map(|&v| SimNodeState::new(NodeState::correct(0), v, v)).collect();
    let trace = run_execution(&sync, &t, period, init, &DaemonStrategy::Synchronous, Limits::new(1000, StopOn::Terminal), 0).unwrap();
    let text = to_jsonl_string(&trace);
    assert_eq!(peek_protocol(&text).unwrap(), ("lazy".to_string(), Some("min-prop".to_string())));
    let back = read_jsonl::<SimNodeState<i64>>(&text).unwrap();
    assert_eq!(back, trace);
    assert_eq!(verify_sim_trace(&sync, &back).0.status, VerificationStatus::Ok);

    let sync = Synchronizer::new(alg_min_id_bfs(4), Mode::Greedy);
    let init: Vec<_> = MinIdBfs::initial(&[3, 1, 4, 2]).into_iter().map(|s| SimNodeState::new(NodeState::correct(1), s, s)).collect();
    let trace = run_execution(&sync, &t, period, init, &DaemonStrategy::CentralRandom, Limits::new(300, StopOn::Never), 5).unwrap();
    let back = read_jsonl::<SimNodeState<BfsState>>(&to_jsonl_string(&trace)).unwrap();
    assert_eq!(back, trace);
    assert_eq!(verify_sim_trace(&sync, &back).0.status, VerificationStatus::Ok);
}

#[test]
fn state_space_and_path_enumeration_agree() {
    for t in small_graphs().into_iter().filter(|t| t.n() <= 2) {
        let period = Period::new(4).unwrap();
        for aux in [AuxPredicate::AlwaysTrue, AuxPredicate::AlwaysFalse] {
            let proto = Unison::with_aux(aux);
            let dp = explore_state_space(&proto, &t, period);
            let paths = enumerate_and_verify(&proto, &t, period, 20, false);
            assert!(!paths.bounds_exceeded);
            assert!(paths.violations.is_empty(), "{:?}", paths.violations);
            assert!(dp.report.is_ok());
            assert_eq!(dp.max_rounds_to_clean, paths.max_rounds_to_clean);
        }
    }
}

#[test]
fn exhaustive_worst_cases_reach_the_round_bound() {
    // Path of three at B = 6: some schedule needs all 2D + 2 rounds.
    let t = Topology::path(3).unwrap();
    let out = explore_state_space(&Unison::greedy(), &t, Period::auto(&t));
    assert_eq!(out.max_rounds_to_clean, 6);
    assert_eq!(out.max_r_moves, 1);
    assert_eq!(out.max_clock_growth, 4);
}
