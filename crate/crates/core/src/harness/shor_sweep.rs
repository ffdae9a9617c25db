use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{mean_sem, MeanSem};
use crate::error::{Error, Result};
use crate::numtheory::{bit_length, gcd, is_prime, multiplicative_order, Semiprime};
use crate::postproc::{classify, Truth, DEFAULT_MULTIPLIER_BOUND};
use crate::seed::derive;
use crate::shor::{ShorSimulator, SimConfig, DEFAULT_QUBIT_CAP};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShorSweepSpec {
    /// Bit length `L` of every generated semiprime.
    pub bit_length: u32,
    pub deltas: Vec<f64>,
    pub problems_per_delta: usize,
    pub shots_per_problem: usize,
    /// Counting bits; `2L` when absent.
    pub t: Option<u32>,
    pub seed: u64,
    /// Largest multiplier tried by the extended post-processing.
    pub multiplier_bound: u64,
    pub qubit_cap: u32,
}

impl Default for ShorSweepSpec {
    fn default() -> Self {
        ShorSweepSpec {
            bit_length: 19,
            deltas: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2],
            problems_per_delta: 500,
            shots_per_problem: 50,
            t: None,
            seed: 0,
            multiplier_bound: DEFAULT_MULTIPLIER_BOUND,
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }
}

impl ShorSweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.bit_length < 4 || self.bit_length > 62 {
            return Err(Error::InvalidInput(format!(
                "bit length {} outside 4..=62",
                self.bit_length
            )));
        }
        if self.deltas.is_empty() || self.deltas.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(Error::InvalidInput(
                "deltas must be a nonempty list of values >= 0".into(),
            ));
        }
        if self.problems_per_delta == 0 || self.shots_per_problem == 0 {
            return Err(Error::InvalidInput(
                "problem and shot counts must be at least 1".into(),
            ));
        }
        if self.bit_length + 1 > self.qubit_cap {
            return Err(Error::QubitCapExceeded {
                required: self.bit_length + 1,
                cap: self.qubit_cap,
            });
        }
        Ok(())
    }

    pub fn counting_bits(&self) -> u32 {
        self.t.unwrap_or(2 * self.bit_length)
    }
}

/// One factoring problem of the sweep: the same problems are reused for
/// every `delta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShorProblem {
    pub index: usize,
    pub semiprime: Semiprime,
    pub a: u64,
    pub order: u64,
    /// Bases rejected because they shared a factor with `N`.
    pub accidental_bases: u32,
}

/// Semiprime with exactly `bits` bits: `p` has `floor(bits/2)` bits and
/// `q != p` is drawn from the range that keeps `p*q` at `bits` bits.
pub fn random_semiprime_bits<R: Rng + ?Sized>(bits: u32, rng: &mut R) -> Result<Semiprime> {
    if !(4..=62).contains(&bits) {
        return Err(Error::InvalidInput(format!(
            "semiprime bit length {bits} outside 4..=62"
        )));
    }
    let pb = bits / 2;
    loop {
        let p = rng.random_range(1u64 << (pb - 1)..1u64 << pb) | 1;
        if p < 3 || !is_prime(p) {
            continue;
        }
        let lo = (1u64 << (bits - 1)).div_ceil(p);
        let hi = ((1u64 << bits) - 1) / p;
        if lo > hi {
            continue;
        }
        let q = rng.random_range(lo..=hi) | 1;
        if q > hi || q == p || q < 3 || !is_prime(q) {
            continue;
        }
        let s = Semiprime::from_factors(p, q)?;
        debug_assert_eq!(bit_length(s.n), bits);
        return Ok(s);
    }
}

pub fn generate_problem(spec: &ShorSweepSpec, index: usize) -> Result<ShorProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive(spec.seed, &[index as u64]));
    let semiprime = random_semiprime_bits(spec.bit_length, &mut rng)?;
    let n = semiprime.n;
    let mut accidental_bases = 0;
    let a = loop {
        let a = rng.random_range(2..n);
        if gcd(a, n) == 1 {
            break a;
        }
        accidental_bases += 1;
        log::info!("problem {index}: base {a} shares a factor with {n}; resampling");
    };
    Ok(ShorProblem {
        index,
        semiprime,
        a,
        order: multiplicative_order(a, &semiprime)?,
        accidental_bases,
    })
}

/// Shot counts per category for one problem at one `delta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShorProblemRow {
    pub delta: f64,
    pub problem: usize,
    pub n: u64,
    pub p: u64,
    pub q: u64,
    pub a: u64,
    pub order: u64,
    pub accidental_bases: u32,
    pub shots: usize,
    pub shor: usize,
    pub shor_lucky: usize,
    pub extended: usize,
    pub peak: usize,
}

/// Means over problems of the per-problem success fractions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShorSweepRow {
    pub delta: f64,
    pub problems: usize,
    pub shots_per_problem: usize,
    pub shor_mean: f64,
    pub shor_sem: f64,
    pub shor_lucky_mean: f64,
    pub shor_lucky_sem: f64,
    pub extended_mean: f64,
    pub extended_sem: f64,
    pub peak_mean: f64,
    pub peak_sem: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShorSweepResult {
    pub spec: ShorSweepSpec,
    pub rows: Vec<ShorSweepRow>,
    pub problems: Vec<ShorProblemRow>,
    pub accidental_bases: u64,
}

fn run_problem(spec: &ShorSweepSpec, problem: &ShorProblem, d: usize) -> Result<ShorProblemRow> {
    let delta = spec.deltas[d];
    let t = spec.counting_bits();
    let s = problem.semiprime;
    let mut sim = ShorSimulator::new(
        &s,
        problem.a,
        t,
        SimConfig {
            qubit_cap: spec.qubit_cap,
        },
    )?;
    let truth = Truth {
        semiprime: s,
        order: problem.order,
    };
    let mut row = ShorProblemRow {
        delta,
        problem: problem.index,
        n: s.n,
        p: s.p,
        q: s.q,
        a: problem.a,
        order: problem.order,
        accidental_bases: problem.accidental_bases,
        shots: spec.shots_per_problem,
        shor: 0,
        shor_lucky: 0,
        extended: 0,
        peak: 0,
    };
    for shot in 0..spec.shots_per_problem {
        let seed = derive(spec.seed, &[problem.index as u64, d as u64, shot as u64]);
        let record = sim.run(delta, seed);
        let c = classify(&record, problem.a, &truth, spec.multiplier_bound)?;
        row.shor += usize::from(c.shor_success);
        row.shor_lucky += usize::from(c.shor_or_lucky());
        row.extended += usize::from(c.extended_success);
        row.peak += usize::from(c.peak);
    }
    Ok(row)
}

/// Runs every problem at every `delta`; problems run in parallel and the
/// result does not depend on the number of threads.
pub fn run_shor_sweep(spec: &ShorSweepSpec) -> Result<ShorSweepResult> {
    spec.validate()?;
    let problems: Vec<ShorProblem> = (0..spec.problems_per_delta)
        .into_par_iter()
        .map(|i| generate_problem(spec, i))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..spec.deltas.len())
        .flat_map(|d| (0..problems.len()).map(move |i| (d, i)))
        .collect();
    let rows: Vec<ShorProblemRow> = jobs
        .par_iter()
        .map(|&(d, i)| run_problem(spec, &problems[i], d))
        .collect::<Result<_>>()?;
    let shots = spec.shots_per_problem as f64;
    let summary = spec
        .deltas
        .iter()
        .enumerate()
        .map(|(d, &delta)| {
            let mine = &rows[d * problems.len()..(d + 1) * problems.len()];
            let stat = |f: fn(&ShorProblemRow) -> usize| -> MeanSem {
                mean_sem(&mine.iter().map(|r| f(r) as f64 / shots).collect::<Vec<_>>())
            };
            let (s, sl, e, p) = (
                stat(|r| r.shor),
                stat(|r| r.shor_lucky),
                stat(|r| r.extended),
                stat(|r| r.peak),
            );
            ShorSweepRow {
                delta,
                problems: mine.len(),
                shots_per_problem: spec.shots_per_problem,
                shor_mean: s.mean,
                shor_sem: s.sem,
                shor_lucky_mean: sl.mean,
                shor_lucky_sem: sl.sem,
                extended_mean: e.mean,
                extended_sem: e.sem,
                peak_mean: p.mean,
                peak_sem: p.sem,
            }
        })
        .collect();
    Ok(ShorSweepResult {
        spec: spec.clone(),
        rows: summary,
        accidental_bases: problems.iter().map(|p| p.accidental_bases as u64).sum(),
        problems: rows,
    })
}
