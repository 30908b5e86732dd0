use std::fs;
use std::io::BufWriter;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use unison_core::campaign::{run_campaign_with, CampaignSpec, Execution, Family, PeriodPolicy};
use unison_core::config::InitSource;
use unison_core::scheduler::{run_execution, DaemonStrategy, Limits, StopOn};
use unison_core::synchronizer::{
    alg_min_id_bfs, alg_min_propagation, verify_sim_trace, BfsState, MinIdBfs, Mode, SimNodeState, SyncAlgorithm, Synchronizer,
};
use unison_core::topology::GraphSource;
use unison_core::trace::{peek_protocol, read_jsonl, write_jsonl, TraceState};
use unison_core::verifier::{verify_trace, VerificationReport};
use unison_core::{AuxPredicate, NodeState, Period, Topology, Trace, Unison};

use crate::{ExecArgs, RunArgs, SimulateArgs, SweepArgs, VerifyArgs};

fn parse_period(s: &str, t: &Topology) -> Result<Period> {
    if s == "auto" {
        return Ok(Period::auto(t));
    }
    let b: i32 = s.parse().with_context(|| format!("--B must be `auto` or an integer, got `{s}`"))?;
    Ok(Period::for_topology(b, t)?)
}

fn parse_stop_on(s: &str) -> Result<StopOn> {
    match s {
        "terminal" => Ok(StopOn::Terminal),
        "clean" => Ok(StopOn::Clean),
        "never" => Ok(StopOn::Never),
        _ => bail!("--stop-on must be terminal, clean or never, got `{s}`"),
    }
}

fn parse_aux(s: &str) -> Result<AuxPredicate> {
    match s {
        "true" | "greedy" => Ok(AuxPredicate::AlwaysTrue),
        "false" => Ok(AuxPredicate::AlwaysFalse),
        _ => bail!("P_aux must be `true` or `false`, got `{s}`"),
    }
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| anyhow!("bad {what} `{x}`")))
        .collect()
}

struct Prepared {
    topology: Topology,
    period: Period,
    init: Vec<NodeState>,
    daemon: DaemonStrategy,
    limits: Limits,
    rng: ChaCha8Rng,
}

fn prepare(a: &ExecArgs) -> Result<Prepared> {
    let topology = GraphSource::from_str(&a.graph)?.load(a.seed)?;
    let period = parse_period(&a.period, &topology)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let init = InitSource::from_str(&a.init)?.resolve(topology.n(), period, &mut rng)?;
    let daemon = DaemonStrategy::from_str(&a.daemon)?;
    if daemon == DaemonStrategy::Exhaustive {
        bail!("the exhaustive daemon is only available through `sweep --exhaustive`");
    }
    let limits = Limits::new(a.max_steps, parse_stop_on(&a.stop_on)?).lingering(a.linger);
    Ok(Prepared {
        topology,
        period,
        init,
        daemon,
        limits,
        rng,
    })
}

fn write_trace<S: TraceState>(trace: &Trace<S>, path: &Path) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_jsonl(trace, BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))
}

fn emit(value: &Value, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    println!("{text}");
    if let Some(p) = path {
        fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn report_value(report: &VerificationReport) -> Value {
    serde_json::to_value(report).expect("reports serialize")
}

pub fn run(a: RunArgs) -> Result<u8> {
    let p = prepare(&a.exec)?;
    let proto = Unison::with_aux(parse_aux(&a.paux)?);
    let trace = run_execution(&proto, &p.topology, p.period, p.init, &p.daemon, p.limits, a.exec.seed)?;
    write_trace(&trace, &a.exec.out)?;
    let report = verify_trace(&proto, &trace);
    let mut out = report_value(&report);
    out["trace"] = json!(a.exec.out.display().to_string());
    emit(&out, None)?;
    Ok(report.status.exit_code() as u8)
}

pub fn verify(a: VerifyArgs) -> Result<u8> {
    let text = fs::read_to_string(&a.trace).with_context(|| format!("reading {}", a.trace.display()))?;
    let (aux, alg) = peek_protocol(&text)?;
    let (report, sim) = match alg.as_deref() {
        None => {
            let trace = read_jsonl::<NodeState>(&text)?;
            let proto = Unison::with_aux(parse_aux(&aux).context("trace P_aux cannot be replayed")?);
            (verify_trace(&proto, &trace), None)
        }
        Some("min-prop") => {
            let trace = read_jsonl::<SimNodeState<i64>>(&text)?;
            verify_sim(alg_min_propagation(), &aux, &trace)?
        }
        Some("min-id-bfs") => {
            let trace = read_jsonl::<SimNodeState<BfsState>>(&text)?;
            let n = trace.topology().n();
            verify_sim(alg_min_id_bfs(n), &aux, &trace)?
        }
        Some(other) => bail!("unknown algorithm `{other}` in trace header"),
    };
    let mut out = report_value(&report);
    if let Some(s) = sim {
        out["simulation"] = s;
    }
    emit(&out, a.report.as_deref())?;
    Ok(report.status.exit_code() as u8)
}

fn verify_sim<A: SyncAlgorithm>(alg: A, aux: &str, trace: &Trace<SimNodeState<A::State>>) -> Result<(VerificationReport, Option<Value>)> {
    let mode: Mode = aux.parse().map_err(|e: String| anyhow!(e))?;
    let curr: Vec<_> = trace.init.iter().map(|s| s.curr.clone()).collect();
    alg.validate(&curr)?;
    let sync = Synchronizer::new(alg, mode);
    let (report, summary) = verify_sim_trace(&sync, trace);
    Ok((report, Some(serde_json::to_value(summary)?)))
}

pub fn sweep(a: SweepArgs) -> Result<u8> {
    let families = a
        .families
        .split(',')
        .map(|f| f.trim().parse::<Family>().map_err(|e| anyhow!(e)))
        .collect::<Result<Vec<_>>>()?;
    let daemons = a
        .daemons
        .split(';')
        .map(|d| DaemonStrategy::from_str(d.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    let period = match a.period.as_str() {
        "auto" => PeriodPolicy::Auto,
        b => PeriodPolicy::Fixed(b.parse().with_context(|| format!("--B must be `auto` or an integer, got `{b}`"))?),
    };
    let spec = CampaignSpec {
        families,
        n_min: a.n_min,
        n_max: a.n_max,
        daemons,
        seeds_per_cell: a.seeds,
        period,
        exhaustive: a.exhaustive,
        exhaustive_max_n: a.exhaustive_n,
        enumeration_depth: a.depth,
        base_seed: a.base_seed,
        inject_fault: a.inject_fault,
    };
    spec.validate().map_err(|e| anyhow!(e))?;
    let exec = if a.sequential { Execution::Sequential } else { Execution::Parallel };
    let report = run_campaign_with(&spec, exec);
    if let Some(path) = &a.csv {
        fs::write(path, report.csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    let violations = report.violations();
    let failures: Vec<String> = violations.iter().take(50).map(|(at, v)| format!("{at}: {v}")).collect();
    let worst = report
        .cells
        .iter()
        .filter_map(|c| c.rounds_to_clean.map(|r| r as i64 - (2 * c.diameter as i64 + 2)))
        .max();
    let out = json!({
        "status": report.status(),
        "cells": report.cells.len(),
        "failed_cells": report.cells.iter().filter(|c| !c.violations.is_empty()).count(),
        "violations": report.counts(),
        "failures": failures,
        "max_rounds_minus_bound": worst,
        "max_moves": report.cells.iter().map(|c| c.moves).max(),
        "exhaustive": report.exhaustive,
        "enumerated": report.enumerated.iter().map(|e| json!({
            "graph": e.graph,
            "B": e.period,
            "aux": e.aux,
            "traces": e.traces,
            "max_rounds_to_clean": e.max_rounds_to_clean,
            "bounds_exceeded": e.bounds_exceeded,
            "violations": e.violations.len(),
        })).collect::<Vec<_>>(),
    });
    emit(&out, a.report.as_deref())?;
    Ok(report.status().exit_code() as u8)
}

pub fn simulate(a: SimulateArgs) -> Result<u8> {
    let mut p = prepare(&a.exec)?;
    let mode: Mode = a.mode.parse().map_err(|e: String| anyhow!(e))?;
    let n = p.topology.n();
    match a.alg.as_str() {
        "min-prop" => {
            if a.ids.is_some() {
                bail!("--ids applies to min-id-bfs");
            }
            let alg = alg_min_propagation();
            let states = match &a.values {
                Some(v) => parse_list::<i64>(v, "value")?.into_iter().map(|x| (x, x)).collect(),
                None => random_states(&alg, n, &mut p.rng),
            };
            simulate_with(alg, mode, &a, p, states)
        }
        "min-id-bfs" => {
            if a.values.is_some() {
                bail!("--values applies to min-prop");
            }
            let alg = alg_min_id_bfs(n);
            let states = match &a.ids {
                Some(v) => MinIdBfs::initial(&parse_list::<u32>(v, "identifier")?).into_iter().map(|s| (s, s)).collect(),
                None => random_states(&alg, n, &mut p.rng),
            };
            simulate_with(alg, mode, &a, p, states)
        }
        other => bail!("unknown algorithm `{other}` (expected min-prop or min-id-bfs)"),
    }
}

fn random_states<A: SyncAlgorithm>(alg: &A, n: usize, rng: &mut ChaCha8Rng) -> Vec<(A::State, A::State)> {
    (0..n).map(|q| (alg.random_state(q, rng), alg.random_state(q, rng))).collect()
}

fn simulate_with<A: SyncAlgorithm>(alg: A, mode: Mode, a: &SimulateArgs, p: Prepared, states: Vec<(A::State, A::State)>) -> Result<u8> {
    if states.len() != p.topology.n() {
        bail!("{} initial algorithm states for {} nodes", states.len(), p.topology.n());
    }
    let curr: Vec<_> = states.iter().map(|s| s.1.clone()).collect();
    alg.validate(&curr)?;
    let init: Vec<_> = p.init.into_iter().zip(states).map(|(u, (old, curr))| SimNodeState::new(u, old, curr)).collect();
    let sync = Synchronizer::new(alg, mode);
    let trace = run_execution(&sync, &p.topology, p.period, init, &p.daemon, p.limits, a.exec.seed)?;
    write_trace(&trace, &a.exec.out)?;
    let (report, summary) = verify_sim_trace(&sync, &trace);
    let mut out = report_value(&report);
    out["simulation"] = serde_json::to_value(summary)?;
    out["trace"] = json!(a.exec.out.display().to_string());
    emit(&out, a.report.as_deref())?;
    Ok(report.status.exit_code() as u8)
}
