//! Acceptance gate. One test per criterion, all sharing a single run of the
//! standard campaign and of the synchronizer campaign. Each test writes a
//! `PASS criterion k` or `FAIL criterion k` line straight to stderr so the
//! verdicts show up even when output is captured.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::OnceLock;

use unison_core::campaign::{forge_step, run_campaign, sync_campaign, CampaignReport, CampaignSpec, Execution, SyncCellResult};
use unison_core::rules::Rule;
use unison_core::scheduler::{run_execution, DaemonStrategy, Limits, StopOn};
use unison_core::synchronizer::{alg_min_propagation, verify_sim_trace, Mode, SimNodeState, Synchronizer};
use unison_core::trace::{StepRecord, Termination, Trace, TraceHeader};
use unison_core::verifier::{
    check_bounds, check_invariants, e_path_violation, verify_trace, VerificationStatus, Violation, ViolationKind as K,
};
use unison_core::{NodeId, NodeState, Period, Topology, Unison};

struct Campaigns {
    unison: CampaignReport,
    sync: Vec<SyncCellResult>,
}

fn campaigns() -> &'static Campaigns {
    static C: OnceLock<Campaigns> = OnceLock::new();
    C.get_or_init(|| Campaigns {
        unison: run_campaign(&CampaignSpec::standard()),
        sync: sync_campaign(100, Execution::Parallel),
    })
}

fn verdict(k: u32, failures: &[String], detail: &str) {
    let line = if failures.is_empty() {
        format!("PASS criterion {k}: {detail}")
    } else {
        let shown: Vec<&str> = failures.iter().take(5).map(String::as_str).collect();
        format!("FAIL criterion {k}: {detail}; {} failure(s): {}", failures.len(), shown.join(" | "))
    };
    let _ = writeln!(std::io::stderr(), "{line}");
    assert!(failures.is_empty(), "{line}");
}

fn campaign_hits(kinds: &[K]) -> Vec<String> {
    campaigns()
        .unison
        .violations()
        .into_iter()
        .filter(|(_, v)| kinds.contains(&v.kind))
        .map(|(at, v)| format!("{at}: {v}"))
        .collect()
}

fn count_by_kind(hits: &[(String, Violation)]) -> BTreeMap<K, usize> {
    let mut m = BTreeMap::new();
    for (_, v) in hits {
        *m.entry(v.kind).or_insert(0) += 1;
    }
    m
}

/// Trace built verbatim from configurations and fired rules, with no input
/// validation, so negative controls can use undersized periods.
fn forged(t: Topology, period: i32, configs: Vec<Vec<NodeState>>, fired: Vec<Vec<(NodeId, Rule)>>) -> Trace<NodeState> {
    let steps = configs[1..]
        .iter()
        .zip(fired)
        .enumerate()
        .map(|(index, (post, fired))| StepRecord {
            index,
            selected: fired.iter().map(|f| f.0).collect(),
            fired,
            post: post.clone(),
        })
        .collect();
    Trace {
        header: TraceHeader {
            topology: t,
            period: Period::new(period).unwrap(),
            daemon: DaemonStrategy::Synchronous,
            aux: "true".into(),
            seed: 0,
            algorithm: None,
        },
        init: configs[0].clone(),
        steps,
        termination: Termination::StepLimit,
    }
}

fn c(x: i32) -> NodeState {
    NodeState::correct(x)
}

fn e(x: i32) -> NodeState {
    NodeState::error(x)
}

fn control(name: &str, found: bool, failures: &mut Vec<String>) {
    if !found {
        failures.push(format!("negative control `{name}` not flagged"));
    }
}

#[test]
fn criterion_1_rounds_to_clean() {
    let camp = &campaigns().unison;
    let mut failures = campaign_hits(&[K::RoundsToClean, K::NonTermination]);
    let mut worst = 0i64;
    for cell in &camp.cells {
        match cell.rounds_to_clean {
            Some(r) => {
                let cap = 2 * cell.diameter + 2;
                worst = worst.max(r as i64 - cap as i64);
                if r > cap {
                    failures.push(format!("{}:{} seed {}: {r} rounds > {cap}", cell.family, cell.n, cell.seed));
                }
            }
            None => failures.push(format!("{}:{} seed {}: never clean", cell.family, cell.n, cell.seed)),
        }
    }
    for o in &camp.exhaustive {
        let cap = 2 * o.diameter + 2;
        worst = worst.max(o.max_rounds_to_clean as i64 - cap as i64);
        if o.max_rounds_to_clean > cap {
            failures.push(format!("exhaustive n={}: {} rounds > {cap}", o.n, o.max_rounds_to_clean));
        }
    }
    failures.extend(campaign_hits(&[K::OracleDisagreement]));
    let detail = format!(
        "{} sampled cells, {} exhaustive instances, {} enumerated paths; max rounds minus (2D+2) = {worst}",
        camp.cells.len(),
        camp.exhaustive.len(),
        camp.enumerated.iter().map(|e| e.traces).sum::<usize>()
    );
    verdict(1, &failures, &detail);
}

#[test]
fn criterion_2_move_budgets() {
    let camp = &campaigns().unison;
    let mut failures = campaign_hits(&[K::RMoves, K::UMoves, K::PMoves, K::CMoves]);
    for o in &camp.exhaustive {
        let nb = o.n * o.period as usize;
        if o.max_r_moves > 1 || o.max_p_moves > nb || o.max_u_moves_per_unclean_segment > 2 * o.diameter || o.max_c_minus_p > o.n as i64 {
            failures.push(format!("exhaustive n={} B={}: {o:?}", o.n, o.period));
        }
    }
    let double_reset = forged(
        Topology::path(1).unwrap(),
        4,
        vec![vec![c(-3)], vec![e(-4)], vec![e(-4)]],
        vec![vec![(0, Rule::RR)], vec![(0, Rule::RR)]],
    );
    control("double R-move", check_bounds(&double_reset, &[1, 2]).has(K::RMoves), &mut failures);
    let max_u = camp.exhaustive.iter().map(|o| o.max_u_moves_per_unclean_segment).max().unwrap_or(0);
    verdict(2, &failures, &format!("R <= 1, U <= 2D per unclean segment, P <= nB, C <= P + n; exhaustive max U = {max_u}"));
}

#[test]
fn criterion_3_structural_oracles() {
    let kinds = [K::RootCreation, K::AlmostCleanClosure, K::CleanClosure, K::Hole, K::ColorInterval, K::EPath, K::RootClearing];
    let hits: Vec<(String, Violation)> = campaigns().unison.violations().into_iter().filter(|(_, v)| kinds.contains(&v.kind)).collect();
    let counts = count_by_kind(&hits);
    let mut failures: Vec<String> = hits.iter().map(|(at, v)| format!("{at}: {v}")).collect();

    let created = forged(Topology::path(2).unwrap(), 4, vec![vec![c(0), c(0)], vec![c(0), c(2)]], vec![vec![(1, Rule::RU)]]);
    let inv = check_invariants(&created);
    control("root creation", inv.has(K::RootCreation), &mut failures);
    control("clean closure", inv.has(K::CleanClosure), &mut failures);
    control("almost-clean closure", inv.has(K::AlmostCleanClosure), &mut failures);

    // Eight distinct clocks with B = 4 leave no hole.
    let full = forged(Topology::path(8).unwrap(), 4, vec![(-4..4).map(c).collect()], vec![]);
    control("hole", check_invariants(&full).has(K::Hole), &mut failures);

    let gap = forged(Topology::path(3).unwrap(), 6, vec![vec![c(-1), c(0), c(5)]], vec![]);
    control("clock interval", check_invariants(&gap).has(K::ColorInterval), &mut failures);

    let t = Topology::path(3).unwrap();
    let cfg = [e(-3), e(-4), c(0)];
    let bad_path = e_path_violation(&cfg, &t, Period::new(6).unwrap(), 0, Ok(vec![0]));
    control("E-path", bad_path.is_some_and(|v| v.kind == K::EPath), &mut failures);

    let cleared = forged(Topology::path(1).unwrap(), 4, vec![vec![e(-2)], vec![c(-2)]], vec![vec![(0, Rule::RC)]]);
    control("root clearing", check_invariants(&cleared).has(K::RootClearing), &mut failures);

    verdict(3, &failures, &format!("campaign counts {counts:?}; 7 negative controls"));
}

#[test]
fn criterion_4_clock_growth() {
    let camp = &campaigns().unison;
    let mut failures = campaign_hits(&[K::ClockGrowth]);
    for o in &camp.exhaustive {
        if o.max_clock_growth > 2 * o.diameter as i64 {
            failures.push(format!("exhaustive n={}: growth {}", o.n, o.max_clock_growth));
        }
    }
    // D = 1, node 0 climbs four ticks while node 1 stays a root.
    let configs: Vec<Vec<NodeState>> = (0..5).map(|k| vec![c(-6 + k), e(-1)]).collect();
    let climb = forged(Topology::path(2).unwrap(), 6, configs, (0..4).map(|_| vec![(0, Rule::RU)]).collect());
    control("clock growth", check_bounds(&climb, &[]).has(K::ClockGrowth), &mut failures);
    let worst = camp.exhaustive.iter().map(|o| o.max_clock_growth - 2 * o.diameter as i64).max().unwrap_or(0);
    verdict(4, &failures, &format!("pre-clean growth <= 2D everywhere; exhaustive max growth minus 2D = {worst}"));
}

#[test]
fn criterion_5_liveness() {
    let camp = &campaigns().unison;
    let mut failures = campaign_hits(&[K::Liveness]);
    for cell in &camp.cells {
        if cell.termination == Termination::Terminal {
            failures.push(format!("{}:{} seed {}: terminal under greedy P_aux", cell.family, cell.n, cell.seed));
        }
    }
    verdict(5, &failures, "every clean configuration reached with greedy P_aux has an enabled node");
}

#[test]
fn criterion_6_synchronizer_equivalence() {
    let sync = &campaigns().sync;
    let mut failures = Vec::new();
    let mut simulated = 0;
    for r in sync {
        simulated += r.summary.simulated_rounds;
        for v in r.violations.iter().filter(|v| matches!(v.kind, K::SimulationMismatch | K::TimeAssignment)) {
            failures.push(format!("{} {} {:?} seed {}: {v}", r.alg, r.mode, r.start, r.seed));
        }
        if r.summary.first_clean.is_none() {
            failures.push(format!("{} {} {:?} seed {}: never clean", r.alg, r.mode, r.start, r.seed));
        }
    }
    let t = Topology::path(3).unwrap();
    let s = Synchronizer::new(alg_min_propagation(), Mode::Greedy);
    let init: Vec<_> = [5, 2, 9].iter().map(|&v| SimNodeState::new(c(0), v, v)).collect();
    let mut corrupted = run_execution(&s, &t, Period::auto(&t), init, &DaemonStrategy::Synchronous, Limits::new(4, StopOn::Never), 0).unwrap();
    corrupted.steps[1].post[0].curr = 7;
    let (report, _) = verify_sim_trace(&s, &corrupted);
    control("corrupted simulated state", report.invariants.iter().any(|v| v.kind == K::SimulationMismatch), &mut failures);
    verdict(6, &failures, &format!("{} runs, {simulated} simulated rounds compared with the synchronous executor", sync.len()));
}

#[test]
fn criterion_7_lazy_bounds() {
    let sync = &campaigns().sync;
    let lazy_kinds = [K::LazyMoves, K::LazyTermination, K::LazyMaxTime, K::LazyNonNegativeTimes, K::LazyRoundsAfterNonNegative, K::LazyTotalRounds];
    let mut failures = Vec::new();
    let mut runs = 0;
    let mut max_t = 0;
    for r in sync.iter().filter(|r| r.mode == "lazy") {
        runs += 1;
        for v in r.violations.iter().filter(|v| lazy_kinds.contains(&v.kind)) {
            failures.push(format!("{} {:?} seed {}: {v}", r.alg, r.start, r.seed));
        }
        if r.termination != Termination::Terminal {
            failures.push(format!("{} {:?} seed {}: ended {}", r.alg, r.start, r.seed, r.termination));
        }
        match &r.summary.lazy {
            Some(stats) => max_t = max_t.max(stats.t_measured),
            None => failures.push(format!("{} {:?} seed {}: no lazy statistics", r.alg, r.start, r.seed)),
        }
    }
    verdict(7, &failures, &format!("{runs} lazy runs within n(T+D) moves and 5D+3T rounds; largest measured T = {max_t}"));
}

#[test]
fn criterion_8_termination_and_csv() {
    let camp = &campaigns().unison;
    let mut failures = campaign_hits(&[K::NonTermination]);
    for cell in &camp.cells {
        if cell.termination != Termination::CleanReachedAndStopped {
            failures.push(format!("{}:{} seed {}: ended {}", cell.family, cell.n, cell.seed, cell.termination));
        }
    }
    for e in &camp.enumerated {
        if e.bounds_exceeded {
            failures.push(format!("enumeration on {} hit its depth bound", e.graph));
        }
    }
    for r in &campaigns().sync {
        if r.status != VerificationStatus::Ok {
            failures.extend(r.violations.iter().map(|v| format!("{} {} {:?} seed {}: {v}", r.alg, r.mode, r.start, r.seed)));
        }
    }
    let csv = camp.csv();
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("campaign_moves.csv");
    if let Err(err) = std::fs::write(&path, &csv) {
        failures.push(format!("writing {}: {err}", path.display()));
    }
    let max_moves = camp.cells.iter().map(|c| c.moves).max().unwrap_or(0);
    verdict(8, &failures, &format!("every run terminated; {} CSV rows at {} (max moves {max_moves})", csv.lines().count() - 1, path.display()));
}

#[test]
fn injected_faults_fail_the_campaign() {
    let spec = CampaignSpec {
        n_min: 4,
        n_max: 4,
        seeds_per_cell: 2,
        exhaustive: false,
        inject_fault: true,
        ..CampaignSpec::standard()
    };
    assert_eq!(run_campaign(&spec).status(), VerificationStatus::InvariantViolation);
    let t = Topology::ring(4).unwrap();
    let mut trace = run_execution(&Unison::greedy(), &t, Period::auto(&t), vec![c(0); 4], &DaemonStrategy::CentralRandom, Limits::new(5, StopOn::Never), 3).unwrap();
    forge_step(&mut trace);
    assert!(verify_trace(&Unison::greedy(), &trace).invariants.iter().any(|v| v.kind == K::Replay));
}
