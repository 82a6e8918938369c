use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};

use diqc_core::applications::{self, PairEstimate, Problem};
use diqc_core::checks::{self, CheckOptions, CheckReport, Suite};
use diqc_core::coordinator::{run_distributed, AggregateResult, DistributedParams, ExecutionMode};
use diqc_core::diqc::{run_node, DiqcConfig, NodeResult, RunStatus};
use diqc_core::io::{load_bit_vector, load_marked_set, parse_bit_vector, parse_marked_set, SetFormat};
use diqc_core::metrics;
use diqc_core::miqae::{run_miqae, MiqaeConfig, MiqaeResult};
use diqc_core::oracle::{BitVector, Indicator, OracleSpec, PartitionScheme};
use diqc_core::qsim::{AnalyticSampler, Backend};

use crate::config::FileConfig;
use crate::output::{mean, num, Sink};
use crate::{BenchArgs, CliError, CompareArgs, CountArgs, EstimationArgs, Outcome, PairArgs, PropArgs};

const ESTIMATION_KEYS: [&str; 9] = ["config", "out", "k", "epsilon", "alpha", "n0", "reps", "seed", "backend"];

fn status_str(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Success => "success",
        RunStatus::Failed => "failed",
    }
}

fn outcome(any_failed: bool) -> Outcome {
    if any_failed {
        Outcome::SomeFailed
    } else {
        Outcome::Complete
    }
}

fn parse_with<T: std::str::FromStr<Err = diqc_core::Error>>(what: &str, text: &str) -> Result<T, CliError> {
    text.parse().map_err(|e| CliError::Usage(format!("{what}: {e}")))
}

struct Estimation {
    params: DistributedParams,
    reps: u64,
    seed: u64,
}

fn resolve_estimation(a: &EstimationArgs, file: &FileConfig) -> Result<Estimation, CliError> {
    let k = file.pick(a.k, "k", 1u32)?;
    let epsilon = file.pick(a.epsilon, "epsilon", 0.01f64)?;
    let alpha = file.pick(a.alpha, "alpha", 0.05f64)?;
    let n0 = file.pick(a.n0, "n0", 1u64)?;
    let reps = file.pick(a.reps, "reps", 1u64)?;
    let seed = file.pick(a.seed, "seed", 0u64)?;
    let backend: Backend = parse_with("backend", &file.pick(a.backend.clone(), "backend", "analytic".into())?)?;
    if reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let params = DistributedParams::new(k, epsilon, alpha)?
        .with_shots_per_batch(n0)?
        .with_backend(backend);
    Ok(Estimation { params, reps, seed })
}

fn estimation_json(e: &Estimation) -> Value {
    let p = &e.params;
    json!({
        "k": p.k,
        "nodes": p.nodes(),
        "epsilon": p.epsilon,
        "alpha": p.alpha,
        "node_epsilon": p.node_epsilon(),
        "node_alpha": p.node_alpha(),
        "n0": p.shots_per_batch,
        "reps": e.reps,
        "seed": e.seed,
        "backend": p.backend.to_string(),
    })
}

fn rep_seed(base: u64, rep: u64, k: u32) -> u64 {
    base.wrapping_add(rep << k)
}

fn load_oracle(a: &CountArgs, file: &FileConfig) -> Result<OracleSpec, CliError> {
    let format: SetFormat = parse_with("format", &file.pick(a.format.clone(), "format", "auto".into())?)?;
    let set = match (file.pick_opt(a.set.clone().map(|p| p.display().to_string()), "set")?, file.pick_opt(a.marked.clone(), "marked")?) {
        (Some(path), None) => load_marked_set(Path::new(&path), format)?,
        (None, Some(list)) => parse_marked_set(&list.replace(',', "\n"), SetFormat::Decimal)?,
        (Some(_), Some(_)) => return Err(CliError::Usage("give either --set or --marked, not both".into())),
        (None, None) => return Err(CliError::Usage("count needs --set FILE or --marked LIST".into())),
    };
    let n = match (file.pick_opt(a.n, "n")?, set.width) {
        (Some(n), Some(w)) if n != w => {
            return Err(CliError::Usage(format!("--n {n} disagrees with the {w}-bit entries of the set")));
        }
        (Some(n), _) | (None, Some(n)) => n,
        (None, None) => return Err(CliError::Usage("decimal sets need --n".into())),
    };
    Ok(OracleSpec::new(n, set.marked)?)
}

const RUNS_HEADER: [&str; 15] = [
    "rep",
    "node",
    "seed",
    "true_count_j[elements]",
    "c_j[elements]",
    "t_prime_j[elements]",
    "interval_low[elements]",
    "interval_high[elements]",
    "oracle_calls_nominal[A_queries]",
    "oracle_calls_physical[A_queries]",
    "shots[measurements]",
    "max_K[amplification]",
    "max_k[grover_power]",
    "rounds[count]",
    "status",
];

const TRACE_HEADER: [&str; 17] = [
    "rep",
    "node",
    "round",
    "K[amplification]",
    "R[quadrant]",
    "r[probability]",
    "q[growth_factor]",
    "shots[measurements]",
    "shots_cap[measurements]",
    "hits[measurements]",
    "a_hat[probability]",
    "a_min[probability]",
    "a_max[probability]",
    "theta_low[rad]",
    "theta_high[rad]",
    "backtracked",
    "retry",
];

fn node_row(rep: u64, truth: u64, r: &NodeResult) -> Vec<String> {
    vec![
        rep.to_string(),
        r.node_id.to_string(),
        r.seed.to_string(),
        truth.to_string(),
        num(r.c_j),
        r.t_prime.to_string(),
        num(r.scaled_low),
        num(r.scaled_high),
        r.oracle_calls_nominal.to_string(),
        r.oracle_calls_physical.to_string(),
        r.total_shots.to_string(),
        r.max_big_k.to_string(),
        r.max_depth().to_string(),
        r.rounds.len().to_string(),
        status_str(r.status).into(),
    ]
}

fn trace_rows(rep: u64, r: &NodeResult) -> impl Iterator<Item = Vec<String>> + '_ {
    r.rounds.iter().map(move |t| {
        vec![
            rep.to_string(),
            r.node_id.to_string(),
            t.round.to_string(),
            t.big_k.to_string(),
            t.quadrant.to_string(),
            num(t.r),
            t.q.to_string(),
            t.shots.to_string(),
            t.shots_cap.to_string(),
            t.hits.to_string(),
            num(t.a_hat),
            num(t.a_min),
            num(t.a_max),
            num(t.theta_low),
            num(t.theta_high),
            t.backtracked.to_string(),
            t.retry.to_string(),
        ]
    })
}

/// Per-node means over repetitions, in the columns of a per-node results table.
fn node_summary(node: u64, truth: u64, runs: &[&NodeResult]) -> Value {
    let m = |f: &dyn Fn(&NodeResult) -> f64| mean(runs.iter().map(|r| f(r)));
    json!({
        "node": node,
        "true_count": truth,
        "mean_c_j": m(&|r| r.c_j),
        "successes": runs.iter().filter(|r| r.succeeded() && r.t_prime == truth).count(),
        "failed_runs": runs.iter().filter(|r| !r.succeeded()).count(),
        "mean_oracle_calls_nominal": m(&|r| r.oracle_calls_nominal as f64),
        "mean_oracle_calls_physical": m(&|r| r.oracle_calls_physical as f64),
        "mean_shots": m(&|r| r.total_shots as f64),
        "mean_max_k": m(&|r| r.max_depth() as f64),
        "mean_max_K": m(&|r| r.max_big_k as f64),
    })
}

pub fn count(a: CountArgs) -> Result<Outcome, CliError> {
    let mut keys = ESTIMATION_KEYS.to_vec();
    keys.extend(["set", "marked", "format", "n", "scheme", "trace"]);
    let file = FileConfig::load(a.common.config.as_deref(), &keys)?;
    let est = resolve_estimation(&a.est, &file)?;
    let scheme: PartitionScheme = parse_with("scheme", &file.pick(a.scheme.clone(), "scheme", "prefix".into())?)?;
    let trace = file.flag(a.trace, "trace")?;
    let out = file.pick_opt(a.common.out.clone().map(|p| p.display().to_string()), "out")?;
    if trace && out.is_none() {
        return Err(CliError::Usage("--trace needs --out".into()));
    }
    let oracle = load_oracle(&a, &file)?;
    let truths: Vec<u64> = oracle.decompose(est.params.k, scheme)?.iter().map(|s| s.t_local()).collect();

    let runs: Vec<AggregateResult> = (0..est.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = rep_seed(est.seed, rep, est.params.k);
            run_distributed(&oracle, &est.params, scheme, seed, ExecutionMode::Sequential)
        })
        .collect::<Result<_, _>>()?;

    let sink = Sink::new(out.map(Into::into))?;
    let truths_ref = &truths;
    sink.csv(
        "runs.csv",
        &RUNS_HEADER,
        runs.iter().enumerate().flat_map(|(rep, agg)| {
            agg.per_node.iter().map(move |r| node_row(rep as u64, truths_ref[r.node_id as usize], r))
        }),
    )?;
    let truth = oracle.count();
    sink.csv(
        "aggregate.csv",
        &["rep", "base_seed", "true_count[elements]", "t_prime[elements]", "error_bound[elements]", "within_bound", "status"],
        runs.iter().enumerate().map(|(rep, agg)| {
            vec![
                rep.to_string(),
                rep_seed(est.seed, rep as u64, est.params.k).to_string(),
                truth.to_string(),
                agg.t_prime.to_string(),
                num(agg.error_bound),
                agg.within_bound(truth).to_string(),
                status_str(agg.status).into(),
            ]
        }),
    )?;
    if trace {
        sink.csv(
            "trace.csv",
            &TRACE_HEADER,
            runs.iter()
                .enumerate()
                .flat_map(|(rep, agg)| agg.per_node.iter().flat_map(move |r| trace_rows(rep as u64, r))),
        )?;
    }

    let nodes: Vec<Value> = (0..est.params.nodes())
        .map(|j| {
            let per: Vec<&NodeResult> = runs.iter().map(|agg| &agg.per_node[j as usize]).collect();
            node_summary(j, truths[j as usize], &per)
        })
        .collect();
    let failed = runs.iter().filter(|r| r.status == RunStatus::Failed).count();
    let mut config = estimation_json(&est);
    config["n"] = json!(oracle.n());
    config["scheme"] = json!(scheme.to_string());
    sink.summary(
        "summary.json",
        &json!({
            "command": "count",
            "config": config,
            "true_count": truth,
            "aggregate": {
                "mean_t_prime": mean(runs.iter().map(|r| r.t_prime as f64)),
                "exact_hits": runs.iter().filter(|r| r.t_prime == truth).count(),
                "within_bound": runs.iter().filter(|r| r.within_bound(truth)).count(),
                "error_bound": runs[0].error_bound,
                "confidence": runs[0].confidence,
                "failed_runs": failed,
            },
            "nodes": nodes,
        }),
    )?;
    Ok(outcome(failed > 0))
}

fn load_vector(path: Option<String>, inline: Option<String>, name: &str) -> Result<BitVector, CliError> {
    match (path, inline) {
        (Some(p), None) => Ok(load_bit_vector(Path::new(&p))?),
        (None, Some(bits)) => Ok(parse_bit_vector(&bits)?),
        (Some(_), Some(_)) => Err(CliError::Usage(format!("give either --{name} or --{name}-bits, not both"))),
        (None, None) => Err(CliError::Usage(format!("missing --{name} FILE or --{name}-bits STRING"))),
    }
}

pub fn pair(problem: Problem, a: PairArgs) -> Result<Outcome, CliError> {
    let mut keys = ESTIMATION_KEYS.to_vec();
    keys.extend(["x", "y", "x_bits", "y_bits"]);
    let file = FileConfig::load(a.common.config.as_deref(), &keys)?;
    let est = resolve_estimation(&a.est, &file)?;
    let path = |p: &Option<std::path::PathBuf>| p.as_ref().map(|p| p.display().to_string());
    let x = load_vector(file.pick_opt(path(&a.x), "x")?, file.pick_opt(a.x_bits.clone(), "x_bits")?, "x")?;
    let y = load_vector(file.pick_opt(path(&a.y), "y")?, file.pick_opt(a.y_bits.clone(), "y_bits")?, "y")?;
    let (truth, name) = match problem {
        Problem::Inner => (applications::exact_inner_product(&x, &y), "inner-product"),
        Problem::Hamming => (applications::exact_hamming(&x, &y), "hamming"),
    };

    let runs: Vec<PairEstimate> = (0..est.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = rep_seed(est.seed, rep, est.params.k);
            match problem {
                Problem::Inner => applications::estimate_inner_product(&x, &y, &est.params, seed, ExecutionMode::Sequential),
                Problem::Hamming => applications::estimate_hamming(&x, &y, &est.params, seed, ExecutionMode::Sequential),
            }
        })
        .collect::<Result<_, _>>()?;

    let out = file.pick_opt(a.common.out.clone().map(|p| p.display().to_string()), "out")?;
    let sink = Sink::new(out.map(Into::into))?;
    sink.csv(
        "runs.csv",
        &[
            "rep",
            "base_seed",
            "exact[fraction]",
            "estimate[fraction]",
            "abs_error[fraction]",
            "bound[fraction]",
            "within_bound",
            "a_invocations[A_applications]",
            "qubits_sent[qubits]",
            "classical_bits[bits]",
            "communication_bound[qubits]",
            "status",
        ],
        runs.iter().enumerate().map(|(rep, r)| {
            vec![
                rep.to_string(),
                rep_seed(est.seed, rep as u64, est.params.k).to_string(),
                num(truth),
                num(r.estimate),
                num((r.estimate - truth).abs()),
                num(r.bound),
                r.within_bound(truth).to_string(),
                r.ledger.a_invocations.to_string(),
                r.ledger.total_qubits.to_string(),
                r.ledger.classical_bits.to_string(),
                num(r.communication_bound),
                status_str(r.status).into(),
            ]
        }),
    )?;
    let failed = runs.iter().filter(|r| r.status == RunStatus::Failed).count();
    let mut config = estimation_json(&est);
    config["n"] = json!(runs[0].n);
    config["input_length"] = json!(x.len().max(y.len()));
    sink.summary(
        "summary.json",
        &json!({
            "command": name,
            "config": config,
            "exact": truth,
            "mean_estimate": mean(runs.iter().map(|r| r.estimate)),
            "bound": runs[0].bound,
            "confidence": runs[0].confidence,
            "within_bound": runs.iter().filter(|r| r.within_bound(truth)).count(),
            "failed_runs": failed,
            "mean_a_invocations": mean(runs.iter().map(|r| r.ledger.a_invocations as f64)),
            "mean_qubits_sent": mean(runs.iter().map(|r| r.ledger.total_qubits as f64)),
            "qubits_per_a": runs[0].ledger.qubits_per_a,
            "classical_bits": runs[0].ledger.classical_bits,
            "communication_bound": runs[0].communication_bound,
        }),
    )?;
    Ok(outcome(failed > 0))
}

struct SweepPoint {
    epsilon: f64,
    diqc: Vec<NodeResult>,
    miqae: Vec<MiqaeResult>,
}

pub fn compare_miqae(a: CompareArgs) -> Result<Outcome, CliError> {
    let keys = ["config", "out", "amplitude", "m", "eps_sweep", "alpha", "n0", "reps", "seed", "backend"];
    let file = FileConfig::load(a.common.config.as_deref(), &keys)?;
    let amplitude = file.pick(a.amplitude, "amplitude", 1.0 / 64.0)?;
    let m = file.pick(a.m, "m", 6u32)?;
    let sweep = file.pick_list(a.eps_sweep.clone(), "eps_sweep", vec![0.005, 0.002, 0.001])?;
    let alpha = file.pick(a.alpha, "alpha", 0.05f64)?;
    let n0 = file.pick(a.n0, "n0", 1u64)?;
    let reps = file.pick(a.reps, "reps", 100u64)?;
    let seed = file.pick(a.seed, "seed", 0u64)?;
    let backend: Backend = parse_with("backend", &file.pick(a.backend.clone(), "backend", "analytic".into())?)?;
    if backend != Backend::Analytic {
        return Err(CliError::Usage("compare-miqae samples a bare amplitude; only the analytic backend applies".into()));
    }
    if sweep.is_empty() {
        return Err(CliError::Usage("the ε sweep is empty".into()));
    }
    if reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&amplitude) {
        return Err(CliError::Usage(format!("amplitude {amplitude} outside [0, 1]")));
    }

    let points: Vec<SweepPoint> = sweep
        .iter()
        .map(|&epsilon| {
            let dcfg = DiqcConfig::new(epsilon, alpha, n0)?;
            let mcfg = MiqaeConfig::new(epsilon, alpha, n0)?;
            // DIQC run s uses seed + s, MIQAE run s uses seed + reps + s.
            let diqc = (0..reps)
                .into_par_iter()
                .map(|s| {
                    let sd = seed.wrapping_add(s);
                    run_node(m, &dcfg, &mut AnalyticSampler::new(amplitude, sd)?, sd)
                })
                .collect::<diqc_core::Result<Vec<_>>>()?;
            let miqae = (0..reps)
                .into_par_iter()
                .map(|s| run_miqae(&mcfg, &mut AnalyticSampler::new(amplitude, seed.wrapping_add(reps + s))?))
                .collect::<diqc_core::Result<Vec<_>>>()?;
            Ok(SweepPoint { epsilon, diqc, miqae })
        })
        .collect::<Result<_, CliError>>()?;

    let out = file.pick_opt(a.common.out.clone().map(|p| p.display().to_string()), "out")?;
    let sink = Sink::new(out.map(Into::into))?;
    // One row per (ε, algorithm): (successes, completed, mean k, mean K, mean calls).
    let stats = |p: &SweepPoint| -> [(usize, usize, f64, f64, f64); 2] {
        let d = &p.diqc;
        let q = &p.miqae;
        [
            (
                d.iter().filter(|r| r.succeeded() && r.covers(amplitude)).count(),
                d.iter().filter(|r| r.succeeded()).count(),
                mean(d.iter().map(|r| r.max_depth() as f64)).unwrap_or(f64::NAN),
                mean(d.iter().map(|r| r.max_big_k as f64)).unwrap_or(f64::NAN),
                mean(d.iter().map(|r| r.oracle_calls_nominal as f64)).unwrap_or(f64::NAN),
            ),
            (
                q.iter().filter(|r| r.status == RunStatus::Success && r.contains(amplitude)).count(),
                q.iter().filter(|r| r.status == RunStatus::Success).count(),
                mean(q.iter().map(|r| r.max_depth() as f64)).unwrap_or(f64::NAN),
                mean(q.iter().map(|r| r.max_big_k as f64)).unwrap_or(f64::NAN),
                mean(q.iter().map(|r| r.oracle_calls as f64)).unwrap_or(f64::NAN),
            ),
        ]
    };
    let names = ["diqc", "miqae"];
    sink.csv(
        "sweep.csv",
        &[
            "epsilon[probability]",
            "algorithm",
            "runs[count]",
            "successes[count]",
            "completed[count]",
            "mean_max_k[grover_power]",
            "mean_max_K[amplification]",
            "mean_oracle_calls[A_queries]",
        ],
        points.iter().flat_map(|p| {
            stats(p).into_iter().zip(names).map(move |(s, name)| {
                vec![num(p.epsilon), name.into(), reps.to_string(), s.0.to_string(), s.1.to_string(), num(s.2), num(s.3), num(s.4)]
            })
        }),
    )?;
    sink.csv(
        "runs.csv",
        &[
            "epsilon[probability]",
            "algorithm",
            "run",
            "seed",
            "estimate[probability]",
            "interval_low[probability]",
            "interval_high[probability]",
            "covers_truth",
            "max_k[grover_power]",
            "oracle_calls[A_queries]",
            "status",
        ],
        points.iter().flat_map(|p| {
            let d = p.diqc.iter().enumerate().map(move |(s, r)| {
                vec![
                    num(p.epsilon),
                    "diqc".into(),
                    s.to_string(),
                    r.seed.to_string(),
                    num(r.amplitude_estimate()),
                    num(r.a_low),
                    num(r.a_high),
                    r.covers(amplitude).to_string(),
                    r.max_depth().to_string(),
                    r.oracle_calls_nominal.to_string(),
                    status_str(r.status).into(),
                ]
            });
            let q = p.miqae.iter().enumerate().map(move |(s, r)| {
                vec![
                    num(p.epsilon),
                    "miqae".into(),
                    s.to_string(),
                    seed.wrapping_add(reps + s as u64).to_string(),
                    num(r.estimate()),
                    num(r.a_low),
                    num(r.a_high),
                    r.contains(amplitude).to_string(),
                    r.max_depth().to_string(),
                    r.oracle_calls.to_string(),
                    status_str(r.status).into(),
                ]
            });
            d.chain(q)
        }),
    )?;
    let rows: Vec<Value> = points
        .iter()
        .flat_map(|p| {
            stats(p).into_iter().zip(names).map(move |(s, name)| {
                json!({
                    "epsilon": p.epsilon,
                    "algorithm": name,
                    "successes": s.0,
                    "completed": s.1,
                    "mean_max_k": s.2,
                    "mean_max_K": s.3,
                    "mean_oracle_calls": s.4,
                })
            })
        })
        .collect();
    sink.summary(
        "summary.json",
        &json!({
            "command": "compare-miqae",
            "config": {"amplitude": amplitude, "m": m, "eps_sweep": sweep, "alpha": alpha, "n0": n0, "reps": reps, "seed": seed},
            "rows": rows,
        }),
    )?;
    // Failed MIQAE runs are the comparison's subject, not an error.
    Ok(outcome(points.iter().any(|p| p.diqc.iter().any(|r| !r.succeeded()))))
}

pub fn bench(a: BenchArgs) -> Result<Outcome, CliError> {
    let file = FileConfig::load(a.common.config.as_deref(), &["config", "out", "n", "k"])?;
    let ns = file.pick_list(a.ns.clone(), "n", vec![4, 6, 8, 10, 12, 16])?;
    let k = file.pick(a.k, "k", 1u32)?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &n in &ns {
        let reports = metrics::counting_comparison(n, k)?;
        summary.push(json!({
            "n": n,
            "k": k,
            "counting_gates_exceed_node_bound": metrics::counting_exceeds_node_gates(n, k)?,
            "rows": reports,
        }));
        for r in reports {
            rows.push(vec![
                n.to_string(),
                k.to_string(),
                r.context,
                r.qubits.to_string(),
                r.gate_count,
                num(r.max_q_depth),
            ]);
        }
    }
    let out = file.pick_opt(a.common.out.clone().map(|p| p.display().to_string()), "out")?;
    let sink = Sink::new(out.map(Into::into))?;
    sink.csv(
        "bench.csv",
        &["n", "k", "context", "qubits[count]", "gate_count[gates]", "max_q_depth[Q_applications]"],
        rows,
    )?;
    sink.summary("summary.json", &json!({"command": "bench", "comparisons": summary}))?;
    Ok(Outcome::Complete)
}

pub fn prop_check(a: PropArgs) -> Result<Outcome, CliError> {
    let file = FileConfig::load(a.common.config.as_deref(), &["config", "out", "suite", "seed", "cases", "inject"])?;
    let defaults = CheckOptions::default();
    let names = file.pick_list(a.suites.clone(), "suite", vec![])?;
    let suites: Vec<Suite> = if names.is_empty() {
        Suite::ALL.to_vec()
    } else {
        names.iter().map(|s| parse_with::<Suite>("suite", s)).collect::<Result<_, _>>()?
    };
    let inject = file
        .pick_opt(a.inject.clone(), "inject")?
        .map(|s| parse_with::<Suite>("inject", &s))
        .transpose()?;
    let options = CheckOptions {
        seed: file.pick(a.seed, "seed", defaults.seed)?,
        random_cases: file.pick(a.cases, "cases", defaults.random_cases)?,
        inject,
    };
    let reports: Vec<_> = suites.iter().map(|&s| checks::run_suite(s, &options)).collect();
    let report = CheckReport {
        seed: options.seed,
        passed: reports.iter().all(|r| r.passed),
        suites: reports,
    };
    let out = file.pick_opt(a.common.out.clone().map(|p| p.display().to_string()), "out")?;
    let sink = Sink::new(out.map(Into::into))?;
    sink.csv(
        "prop_check.csv",
        &["suite", "passed", "cases[count]", "failures[count]", "injected", "first_failure"],
        report.suites.iter().map(|r| {
            vec![
                r.suite.to_string(),
                r.passed.to_string(),
                r.cases.to_string(),
                r.failures.to_string(),
                r.injected.to_string(),
                r.first_failure.clone().unwrap_or_default(),
            ]
        }),
    )?;
    let value = serde_json::to_value(&report).expect("report serializes");
    sink.summary("prop_check.json", &value)?;
    Ok(outcome(!report.passed))
}
