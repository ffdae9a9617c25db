use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

use qfactor_core::harness::{
    fit_scaling, run_anneal_benchmark, run_shor_sweep, to_csv, to_json, write_anneal_outputs,
    write_file, write_shor_outputs, AnnealBenchSpec, EmbedSpec, SamplerSpec, ScalingPoint,
    ShorSweepSpec,
};
use qfactor_core::hwgraph::{
    build_cfa_placement, build_pegasus, embed_heuristic, verify_embedding, ChainStrength,
    DefectList, Embedding,
};
use qfactor_core::numtheory::{bit_length, factorize_small, gcd, multiplicative_order, Semiprime};
use qfactor_core::postproc::{classify, Truth, DEFAULT_MULTIPLIER_BOUND};
use qfactor_core::qubo::{build, FactorEncoding, FactoringQubo, Method, QuboModel};
use qfactor_core::samplers::{
    sample_exhaustive, sample_sa, AnnealSchedule, EnergyScale, SampleSet,
};
use qfactor_core::seed::derive;
use qfactor_core::shor::{ShorSimulator, SimConfig};

use crate::{AnnealCmd, Command, Common, Format, PegasusCmd, Problem, QuboCmd, ShorCmd, Solver};

/// Bad arguments or configuration; exits with status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Shor(ShorCmd::Run {
            n,
            a,
            t,
            delta,
            shots,
            common,
        }) => shor_run(n, a, t, delta, shots, &common),
        Command::Shor(ShorCmd::Sweep {
            bits,
            deltas,
            problems,
            shots,
            t,
            common,
        }) => {
            let mut spec: ShorSweepSpec = load_spec(&common)?;
            spec.bit_length = bits.unwrap_or(spec.bit_length);
            spec.deltas = deltas.unwrap_or(spec.deltas);
            spec.problems_per_delta = problems.unwrap_or(spec.problems_per_delta);
            spec.shots_per_problem = shots.unwrap_or(spec.shots_per_problem);
            spec.t = t.or(spec.t);
            spec.seed = common.seed.unwrap_or(spec.seed);
            spec.validate().map_err(|e| usage(e.to_string()))?;
            let r = run_shor_sweep(&spec)?;
            if let Some(dir) = &common.out {
                write_shor_outputs(dir, &r)?;
            }
            print(&common, || to_csv(&r.rows), || to_json(&r))
        }
        Command::Qubo(QuboCmd::Build { problem, common }) => qubo_build(&problem, &common),
        Command::Qubo(QuboCmd::Solve {
            problem,
            model,
            solver,
            reads,
            sweeps,
            scale,
            common,
        }) => qubo_solve(
            &problem,
            model.as_deref(),
            solver,
            reads,
            sweeps,
            scale.into(),
            &common,
        ),
        Command::Anneal(AnnealCmd::Bench {
            method,
            l_values,
            problems,
            reads,
            solver,
            sweeps,
            scale,
            endpoint,
            pegasus_m,
            sweep_split,
            common,
        }) => {
            let mut spec: AnnealBenchSpec = load_spec(&common)?;
            if let Some(m) = method {
                spec.method = m.into();
            }
            spec.l_values = l_values.unwrap_or(spec.l_values);
            spec.semiprimes_per_l = problems.unwrap_or(spec.semiprimes_per_l);
            spec.reads_per_problem = reads.unwrap_or(spec.reads_per_problem);
            spec.sweep_split |= sweep_split;
            spec.seed = common.seed.unwrap_or(spec.seed);
            match (solver, endpoint) {
                (Some(_), Some(_)) => return Err(usage("--solver and --endpoint are exclusive")),
                (Some(Solver::Exhaustive), None) => spec.sampler = SamplerSpec::Exhaustive,
                (Some(Solver::Sa), None) if !matches!(spec.sampler, SamplerSpec::Sa { .. }) => {
                    spec.sampler = SamplerSpec::default()
                }
                (None, Some(endpoint)) => {
                    spec.sampler = SamplerSpec::Remote {
                        endpoint,
                        max_retries: 3,
                        timeout_secs: 60,
                    }
                }
                _ => {}
            }
            match (&mut spec.sampler, sweeps, scale) {
                (SamplerSpec::Sa { sweeps, scale, .. }, s, e) => {
                    *sweeps = s.unwrap_or(*sweeps);
                    *scale = e.map_or(*scale, Into::into);
                }
                (_, None, None) => {}
                _ => return Err(usage("--sweeps and --scale apply to the sa solver only")),
            }
            if let Some(m) = pegasus_m {
                let chain_strength = spec
                    .embed
                    .as_ref()
                    .map_or(ChainStrength::Auto, |e| e.chain_strength);
                spec.embed = Some(EmbedSpec {
                    pegasus_m: m,
                    chain_strength,
                });
            }
            spec.validate().map_err(|e| usage(e.to_string()))?;
            let r = run_anneal_benchmark(&spec)?;
            if let Some(dir) = &common.out {
                write_anneal_outputs(dir, &r)?;
            }
            print(&common, || to_csv(&r.levels), || to_json(&r))
        }
        Command::Fit { input, common } => fit(&input, &common),
        Command::Pegasus(PegasusCmd::Gen { m, defects, common }) => {
            let g = build_pegasus(m, &read_defects(defects.as_deref())?)?;
            let text = g.to_edge_list();
            if let Some(dir) = &common.out {
                write_file(&dir.join(format!("pegasus_m{m}.txt")), &text)?;
            }
            #[derive(Serialize)]
            struct Counts {
                m: u32,
                nodes: usize,
                edges: usize,
            }
            let counts = Counts {
                m,
                nodes: g.num_nodes(),
                edges: g.num_edges(),
            };
            print(&common, || Ok(text.clone()), || to_json(&counts))
        }
        Command::Pegasus(PegasusCmd::Verify {
            m,
            defects,
            problem,
            model,
            embedding,
            common,
        }) => pegasus_verify(
            m,
            defects.as_deref(),
            &problem,
            model.as_deref(),
            embedding.as_deref(),
            &common,
        ),
    }
}

fn load_spec<T: DeserializeOwned + Default>(common: &Common) -> Result<T> {
    let Some(path) = &common.config else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn print(
    common: &Common,
    csv: impl FnOnce() -> qfactor_core::Result<String>,
    summary: impl FnOnce() -> qfactor_core::Result<String>,
) -> Result<()> {
    let text = match common.format {
        Format::Csv => csv()?,
        Format::Summary => summary()?,
    };
    print!("{text}");
    Ok(())
}

fn read_defects(path: Option<&Path>) -> Result<DefectList> {
    Ok(path.map(DefectList::read).transpose()?.unwrap_or_default())
}

fn semiprime(n: u64) -> Result<Semiprime> {
    match factorize_small(n).as_slice() {
        [(p, 1), (q, 1)] if *p > 2 => Ok(Semiprime::from_factors(*p, *q)?),
        _ => Err(usage(format!(
            "{n} is not a product of two distinct odd primes"
        ))),
    }
}

fn require_n(problem: &Problem) -> Result<u64> {
    problem.n.ok_or_else(|| usage("--n is required"))
}

fn build_problem(problem: &Problem) -> Result<FactoringQubo> {
    let n = require_n(problem)?;
    let (l_p, l_q) = match (problem.lp, problem.lq) {
        (Some(a), Some(b)) => (a, b),
        (None, None) => {
            let s = semiprime(n)?;
            (bit_length(s.p.min(s.q)), bit_length(s.p.max(s.q)))
        }
        _ => return Err(usage("give both --lp and --lq or neither")),
    };
    let method: Method = problem.method.into();
    Ok(build(method, n, l_p, l_q)?)
}

#[derive(Serialize)]
struct ShotRow {
    shot: usize,
    j: u128,
    shor: bool,
    shor_lucky: bool,
    extended: bool,
    peak: bool,
    factor: Option<u64>,
    r_basic: u64,
}

#[derive(Serialize)]
struct ShorRunSummary {
    n: u64,
    p: u64,
    q: u64,
    a: u64,
    order: u64,
    t: u32,
    delta: f64,
    seed: u64,
    shots: usize,
    shor: f64,
    shor_lucky: f64,
    extended: f64,
    peak: f64,
}

fn shor_run(
    n: u64,
    a: Option<u64>,
    t: Option<u32>,
    delta: f64,
    shots: usize,
    common: &Common,
) -> Result<()> {
    let s = semiprime(n)?;
    let seed = common.seed.unwrap_or(0);
    let a = match a {
        Some(a) => a,
        None => (0..)
            .map(|i| 2 + derive(seed, &[u64::MAX, i]) % (n - 3))
            .find(|&a| gcd(a, n) == 1)
            .expect("coprime base exists"),
    };
    let t = t.unwrap_or(2 * s.bit_length_n);
    if shots == 0 {
        return Err(usage("--shots must be at least 1"));
    }
    let mut sim = ShorSimulator::new(&s, a, t, SimConfig::default()).map_err(|e| match e {
        qfactor_core::Error::QubitCapExceeded { .. } => e.into(),
        e => usage(e.to_string()),
    })?;
    let truth = Truth {
        semiprime: s,
        order: multiplicative_order(a, &s)?,
    };
    let mut rows = Vec::with_capacity(shots);
    for shot in 0..shots {
        let rec = sim.run(delta, derive(seed, &[shot as u64]));
        let c = classify(&rec, a, &truth, DEFAULT_MULTIPLIER_BOUND)?;
        rows.push(ShotRow {
            shot,
            j: rec.j,
            shor: c.shor_success,
            shor_lucky: c.shor_or_lucky(),
            extended: c.extended_success,
            peak: c.peak,
            factor: c.recovered_factor,
            r_basic: c.r_basic,
        });
    }
    let frac = |f: fn(&ShotRow) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / shots as f64;
    let summary = ShorRunSummary {
        n,
        p: s.p,
        q: s.q,
        a,
        order: truth.order,
        t,
        delta,
        seed,
        shots,
        shor: frac(|r| r.shor),
        shor_lucky: frac(|r| r.shor_lucky),
        extended: frac(|r| r.extended),
        peak: frac(|r| r.peak),
    };
    if let Some(dir) = &common.out {
        write_file(&dir.join("shor_run.csv"), &to_csv(&rows)?)?;
        write_file(&dir.join("shor_run_summary.json"), &to_json(&summary)?)?;
    }
    print(common, || to_csv(&rows), || to_json(&summary))
}

#[derive(Serialize)]
struct Term {
    i: usize,
    j: usize,
    coefficient: i64,
}

fn terms(model: &QuboModel) -> Vec<Term> {
    let linear = model
        .linear()
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != 0)
        .map(|(i, &a)| Term {
            i,
            j: i,
            coefficient: a,
        });
    let quad = model.quadratic().iter().map(|(&(i, j), &b)| Term {
        i,
        j,
        coefficient: b,
    });
    linear.chain(quad).collect()
}

#[derive(Serialize)]
struct ModelSummary {
    n: u64,
    method: Method,
    l_p: u32,
    l_q: u32,
    num_vars: usize,
    ancillas: usize,
    couplers: usize,
    offset: i64,
    max_abs_coefficient: i64,
}

fn qubo_build(problem: &Problem, common: &Common) -> Result<()> {
    let f = build_problem(problem)?;
    let summary = ModelSummary {
        n: f.n,
        method: f.method,
        l_p: f.encoding.l_p(),
        l_q: f.encoding.l_q(),
        num_vars: f.model.num_vars(),
        ancillas: f.n_ancillas(),
        couplers: f.model.quadratic().len(),
        offset: f.model.offset(),
        max_abs_coefficient: f.model.max_abs_coefficient(),
    };
    if let Some(dir) = &common.out {
        let stem = format!("qubo_{}_{}", f.method, f.n);
        write_file(&dir.join(format!("{stem}.txt")), &f.model.to_text())?;
        write_file(&dir.join(format!("{stem}.json")), &to_json(&summary)?)?;
    }
    print(common, || to_csv(&terms(&f.model)), || to_json(&summary))
}

#[derive(Serialize)]
struct SampleRow {
    assignment: String,
    energy: String,
    occurrences: u64,
    p: u64,
    q: u64,
    factors: bool,
}

#[derive(Serialize)]
struct SolveSummary {
    n: u64,
    sampler: String,
    seed: Option<u64>,
    num_vars: usize,
    reads: u64,
    lowest_energy: Option<String>,
    success_frequency: f64,
    ground_state_frequency: f64,
}

fn qubo_solve(
    problem: &Problem,
    model_path: Option<&Path>,
    solver: Solver,
    reads: u64,
    sweeps: Option<u32>,
    scale: EnergyScale,
    common: &Common,
) -> Result<()> {
    let n = require_n(problem)?;
    let (model, encoding) = match model_path {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let model = QuboModel::from_text(&text)?;
            let enc = FactorEncoding::from_roles(model.roles())?;
            (model, enc)
        }
        None => {
            let f = build_problem(problem)?;
            (f.model, f.encoding)
        }
    };
    if reads == 0 {
        return Err(usage("--reads must be at least 1"));
    }
    let seed = common.seed.unwrap_or(0);
    let set: SampleSet = match solver {
        Solver::Exhaustive => sample_exhaustive(&model, reads)?,
        Solver::Sa => {
            let mut sched = AnnealSchedule::default().with_scale(scale);
            sched.sweeps = sweeps.unwrap_or(sched.sweeps);
            sched.validate().map_err(|e| usage(e.to_string()))?;
            sample_sa(&model, &sched, reads, seed)?
        }
    };
    let rows: Vec<SampleRow> = set
        .records()
        .iter()
        .map(|r| {
            let (p, q) = encoding.decode(&r.assignment);
            SampleRow {
                assignment: r.assignment.iter().map(|b| char::from(b'0' + b)).collect(),
                energy: r.energy.to_string(),
                occurrences: r.occurrences,
                p,
                q,
                factors: p.checked_mul(q) == Some(n) && p > 1 && q > 1,
            }
        })
        .collect();
    let hits = |pred: &dyn Fn(&SampleRow) -> bool| {
        rows.iter()
            .filter(|r| pred(r))
            .map(|r| r.occurrences)
            .sum::<u64>() as f64
            / set.num_reads() as f64
    };
    let summary = SolveSummary {
        n,
        sampler: set.info().sampler.clone(),
        seed: set.info().seed,
        num_vars: model.num_vars(),
        reads: set.num_reads(),
        lowest_energy: set.lowest_energy().map(|e| e.to_string()),
        success_frequency: hits(&|r| r.factors),
        ground_state_frequency: hits(&|r| r.energy == "0"),
    };
    if let Some(dir) = &common.out {
        write_file(&dir.join("qubo_samples.csv"), &to_csv(&rows)?)?;
        write_file(&dir.join("qubo_solve_summary.json"), &to_json(&summary)?)?;
    }
    print(common, || to_csv(&rows), || to_json(&summary))
}

/// Reads `l median` pairs. Comma or whitespace separated; a header naming
/// `l` and `success_median` (or `median`) selects those columns.
fn read_points(text: &str) -> Result<Vec<ScalingPoint>> {
    let split = |line: &str| -> Vec<String> {
        line.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .collect()
    };
    let mut lines = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .peekable();
    let (mut xi, mut yi) = (0, 1);
    if let Some(first) = lines.peek() {
        let head = split(first);
        if head.first().is_some_and(|h| h.parse::<f64>().is_err()) {
            let find = |names: &[&str]| head.iter().position(|h| names.contains(&h.as_str()));
            xi = find(&["l"]).ok_or_else(|| usage("header has no `l` column"))?;
            yi = find(&["success_median", "median"])
                .ok_or_else(|| usage("header has no median column"))?;
            lines.next();
        }
    }
    lines
        .map(|line| {
            let cols = split(line);
            let get = |i: usize| cols.get(i).and_then(|s| s.parse::<f64>().ok());
            match (get(xi), get(yi)) {
                (Some(l), Some(m)) if l >= 0.0 && l.fract() == 0.0 => {
                    Ok(ScalingPoint::from_median(l as u32, m))
                }
                _ => Err(usage(format!("cannot read point from {line:?}"))),
            }
        })
        .collect()
}

fn fit(input: &Path, common: &Common) -> Result<()> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let points = read_points(&text)?;
    let fit = fit_scaling(&points)?;
    if let Some(dir) = &common.out {
        write_file(&dir.join("fit.json"), &to_json(&fit)?)?;
    }
    print(
        common,
        || {
            Ok(format!(
                "exponent,intercept,residual_norm\n{},{},{}\n",
                fit.exponent, fit.intercept, fit.residual_norm
            ))
        },
        || to_json(&fit),
    )
}

#[derive(Serialize)]
struct VerifySummary {
    m: u32,
    nodes: usize,
    edges: usize,
    num_vars: usize,
    num_qubits: usize,
    max_chain: usize,
    valid: bool,
    violations: Vec<String>,
}

#[derive(Serialize)]
struct ChainRow {
    var: usize,
    qubit: u32,
}

fn pegasus_verify(
    m: u32,
    defects: Option<&Path>,
    problem: &Problem,
    model_path: Option<&Path>,
    emb_path: Option<&Path>,
    common: &Common,
) -> Result<()> {
    let graph = build_pegasus(m, &read_defects(defects)?)?;
    let (model, tiles) = match model_path {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            (QuboModel::from_text(&text)?, None)
        }
        None => {
            let f = build_problem(problem)?;
            (f.model, f.tiles)
        }
    };
    let emb = match (emb_path, tiles) {
        (Some(path), _) => Embedding::read(path)?,
        (None, Some(grid)) => build_cfa_placement(&grid, &graph)?,
        (None, None) => embed_heuristic(&model, &graph, common.seed.unwrap_or(0))?,
    };
    let report = verify_embedding(&model, &graph, &emb);
    let summary = VerifySummary {
        m,
        nodes: graph.num_nodes(),
        edges: graph.num_edges(),
        num_vars: model.num_vars(),
        num_qubits: emb.num_qubits(),
        max_chain: emb.max_chain_length(),
        valid: report.is_valid(),
        violations: report.violations.iter().map(ToString::to_string).collect(),
    };
    if let Some(dir) = &common.out {
        if emb_path.is_none() {
            write_file(&dir.join("embedding.txt"), &emb.to_text())?;
        }
        write_file(&dir.join("pegasus_verify.json"), &to_json(&summary)?)?;
    }
    let rows = || {
        let rows: Vec<ChainRow> = emb
            .chains()
            .iter()
            .enumerate()
            .flat_map(|(var, c)| c.iter().map(move |&qubit| ChainRow { var, qubit }))
            .collect();
        to_csv(&rows)
    };
    print(common, rows, || to_json(&summary))?;
    if report.is_valid() {
        Ok(())
    } else {
        Err(anyhow!(
            "embedding has {} violation(s)",
            report.violations.len()
        ))
    }
}
