use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{fit_scaling, median, percentile, ScalingFit, ScalingPoint};
use crate::error::{Error, Result};
use crate::hwgraph::{
    build_cfa_placement, build_pegasus, embed_heuristic, embed_model, unembed_sample,
    ChainStrength, DefectList,
};
use crate::numtheory::random_semiprime;
use crate::qubo::{build, FactoringQubo, Method};
use crate::samplers::{
    global_minimum_frequency, remote_sample, sample_exhaustive, sample_sa, success_frequency,
    AnnealSchedule, EnergyScale, RemoteConfig, SampleSet,
};
use crate::seed::derive;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SamplerSpec {
    Sa {
        #[serde(default = "default_sweeps")]
        sweeps: u32,
        #[serde(default = "default_beta_start")]
        beta_start: f64,
        #[serde(default = "default_beta_end")]
        beta_end: f64,
        /// Annealer-style rescaling unless set otherwise.
        #[serde(default = "default_scale")]
        scale: EnergyScale,
    },
    /// All reads split evenly over the exact ground states.
    Exhaustive,
    Remote {
        endpoint: String,
        #[serde(default = "default_retries")]
        max_retries: u32,
        #[serde(default = "default_timeout")]
        timeout_secs: u64,
    },
}

fn default_sweeps() -> u32 {
    AnnealSchedule::default().sweeps
}
fn default_beta_start() -> f64 {
    AnnealSchedule::default().beta_start
}
fn default_beta_end() -> f64 {
    AnnealSchedule::default().beta_end
}
fn default_scale() -> EnergyScale {
    EnergyScale::MaxCoefficient
}
fn default_retries() -> u32 {
    3
}
fn default_timeout() -> u64 {
    60
}

impl Default for SamplerSpec {
    fn default() -> Self {
        let s = AnnealSchedule::default();
        SamplerSpec::Sa {
            sweeps: s.sweeps,
            beta_start: s.beta_start,
            beta_end: s.beta_end,
            scale: default_scale(),
        }
    }
}

/// Sampling on a Pegasus graph instead of the logical model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedSpec {
    pub pegasus_m: u32,
    #[serde(default = "default_strength")]
    pub chain_strength: ChainStrength,
}

fn default_strength() -> ChainStrength {
    ChainStrength::Auto
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealBenchSpec {
    pub method: Method,
    /// Unknown-bit counts `l = l_p* + l_q*`.
    pub l_values: Vec<u32>,
    pub semiprimes_per_l: usize,
    pub reads_per_problem: u64,
    pub sampler: SamplerSpec,
    pub embed: Option<EmbedSpec>,
    /// Also run the unbalanced splits `l_p* - k, l_q* + k`.
    pub sweep_split: bool,
    pub seed: u64,
}

impl Default for AnnealBenchSpec {
    fn default() -> Self {
        AnnealBenchSpec {
            method: Method::Direct,
            l_values: vec![4, 6, 8, 10],
            semiprimes_per_l: 10,
            reads_per_problem: 10_000,
            sampler: SamplerSpec::default(),
            embed: None,
            sweep_split: false,
            seed: 0,
        }
    }
}

impl AnnealBenchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.l_values.is_empty() || self.l_values.iter().any(|&l| l < 2) {
            return Err(Error::InvalidInput(
                "l values must be a nonempty list of values >= 2".into(),
            ));
        }
        if self.semiprimes_per_l == 0 || self.reads_per_problem == 0 {
            return Err(Error::InvalidInput(
                "problem and read counts must be at least 1".into(),
            ));
        }
        if let SamplerSpec::Sa {
            sweeps,
            beta_start,
            beta_end,
            ..
        } = self.sampler
        {
            AnnealSchedule::new(sweeps, beta_start, beta_end)?;
        }
        Ok(())
    }
}

/// Unknown-bit splits `(l_p*, l_q*)` for `l`: the balanced one first, then
/// moving bits from `p` to `q` when `all` is set.
pub fn splits(l: u32, all: bool) -> Vec<(u32, u32)> {
    let (lp, lq) = (l / 2, l.div_ceil(2));
    let k_max = if all { lp - 1 } else { 0 };
    (0..=k_max).map(|k| (lp - k, lq + k)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealRow {
    pub l: u32,
    pub l_p: u32,
    pub l_q: u32,
    pub index: usize,
    pub n: u64,
    pub p: u64,
    pub q: u64,
    pub num_vars: Option<usize>,
    pub num_qubits: Option<usize>,
    pub success: Option<f64>,
    pub global_min: Option<f64>,
    /// Fraction of chains broken over all reads, for embedded runs.
    pub chain_breaks: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub l: u32,
    pub problems: usize,
    pub failed: usize,
    pub success_median: f64,
    pub success_p25: f64,
    pub success_p75: f64,
    pub global_min_median: f64,
    /// Probability `2^-l` of guessing the unknown bits.
    pub baseline: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealBenchResult {
    pub spec: AnnealBenchSpec,
    pub levels: Vec<LevelSummary>,
    pub fit: Option<ScalingFit>,
    pub fit_error: Option<String>,
    pub rows: Vec<AnnealRow>,
}

struct Outcome {
    num_vars: usize,
    num_qubits: Option<usize>,
    success: f64,
    global_min: f64,
    chain_breaks: Option<f64>,
}

fn sample_logical(
    spec: &AnnealBenchSpec,
    model: &crate::qubo::QuboModel,
    seed: u64,
) -> Result<SampleSet> {
    let reads = spec.reads_per_problem;
    match &spec.sampler {
        SamplerSpec::Sa {
            sweeps,
            beta_start,
            beta_end,
            scale,
        } => {
            let schedule = AnnealSchedule::new(*sweeps, *beta_start, *beta_end)?.with_scale(*scale);
            sample_sa(model, &schedule, reads, seed)
        }
        SamplerSpec::Exhaustive => sample_exhaustive(model, reads),
        SamplerSpec::Remote {
            endpoint,
            max_retries,
            timeout_secs,
        } => {
            let mut c = RemoteConfig::new(endpoint.clone());
            c.max_retries = *max_retries;
            c.timeout = Duration::from_secs(*timeout_secs);
            remote_sample(&c, model, reads)
        }
    }
}

fn run_problem(spec: &AnnealBenchSpec, f: &FactoringQubo, seeds: [u64; 2]) -> Result<Outcome> {
    let model = &f.model;
    let Some(embed) = &spec.embed else {
        let s = sample_logical(spec, model, seeds[0])?;
        return Ok(Outcome {
            num_vars: model.num_vars(),
            num_qubits: None,
            success: success_frequency(&s, &f.encoding, f.n)?,
            global_min: global_minimum_frequency(&s, model)?,
            chain_breaks: None,
        });
    };
    let graph = build_pegasus(embed.pegasus_m, &DefectList::default())?;
    let emb = match &f.tiles {
        Some(grid) if spec.method == Method::Cfa => build_cfa_placement(grid, &graph)?,
        _ => embed_heuristic(model, &graph, seeds[1])?,
    };
    let physical = embed_model(model, &graph, &emb, embed.chain_strength)?;
    let raw = sample_logical(spec, &physical.model, seeds[0])?;
    let mut broken = 0u64;
    let logical: Vec<(Vec<u8>, u64, Option<i128>)> = raw
        .records()
        .iter()
        .map(|r| {
            let (x, b) = unembed_sample(&r.assignment, &emb);
            broken += b as u64 * r.occurrences;
            (x, r.occurrences, None)
        })
        .collect();
    let s = SampleSet::from_counts(model, logical, raw.info().clone())?;
    Ok(Outcome {
        num_vars: model.num_vars(),
        num_qubits: Some(emb.num_qubits()),
        success: success_frequency(&s, &f.encoding, f.n)?,
        global_min: global_minimum_frequency(&s, model)?,
        chain_breaks: Some(broken as f64 / (raw.num_reads() as f64 * emb.num_vars() as f64)),
    })
}

/// Builds, samples and scores `semiprimes_per_l` random problems per `l`
/// (and split). Per-problem failures are recorded in the row.
pub fn run_anneal_benchmark(spec: &AnnealBenchSpec) -> Result<AnnealBenchResult> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for &l in &spec.l_values {
        for (k, (lps, lqs)) in splits(l, spec.sweep_split).into_iter().enumerate() {
            for i in 0..spec.semiprimes_per_l {
                jobs.push((l, k, lps + 2, lqs + 2, i));
            }
        }
    }
    let rows: Vec<AnnealRow> = jobs
        .par_iter()
        .map(|&(l, k, l_p, l_q, i)| {
            let path = [l as u64, k as u64, i as u64];
            let mut row = AnnealRow {
                l,
                l_p,
                l_q,
                index: i,
                n: 0,
                p: 0,
                q: 0,
                num_vars: None,
                num_qubits: None,
                success: None,
                global_min: None,
                chain_breaks: None,
                error: None,
            };
            let s = match random_semiprime(
                l_p,
                l_q,
                derive(spec.seed, &[path[0], path[1], path[2], 0]),
            ) {
                Ok(s) => s,
                Err(e) => {
                    row.error = Some(e.to_string());
                    return row;
                }
            };
            (row.n, row.p, row.q) = (s.n, s.p, s.q);
            let seeds = [1, 2].map(|tag| derive(spec.seed, &[path[0], path[1], path[2], tag]));
            match build(spec.method, s.n, l_p, l_q).and_then(|f| run_problem(spec, &f, seeds)) {
                Ok(o) => {
                    row.num_vars = Some(o.num_vars);
                    row.num_qubits = o.num_qubits;
                    row.success = Some(o.success);
                    row.global_min = Some(o.global_min);
                    row.chain_breaks = o.chain_breaks;
                }
                Err(e) => {
                    log::warn!("l = {l}, N = {}: {e}", s.n);
                    row.error = Some(e.to_string());
                }
            }
            row
        })
        .collect();
    let levels: Vec<LevelSummary> = spec
        .l_values
        .iter()
        .map(|&l| {
            let mine: Vec<&AnnealRow> = rows.iter().filter(|r| r.l == l).collect();
            let succ: Vec<f64> = mine.iter().filter_map(|r| r.success).collect();
            let glob: Vec<f64> = mine.iter().filter_map(|r| r.global_min).collect();
            LevelSummary {
                l,
                problems: mine.len(),
                failed: mine.len() - succ.len(),
                success_median: median(&succ),
                success_p25: percentile(&succ, 25.0),
                success_p75: percentile(&succ, 75.0),
                global_min_median: median(&glob),
                baseline: (-(l as f64)).exp2(),
            }
        })
        .collect();
    let points: Vec<ScalingPoint> = levels
        .iter()
        .filter(|s| !s.success_median.is_nan())
        .map(|s| ScalingPoint {
            l: s.l,
            median: s.success_median,
            p25: s.success_p25,
            p75: s.success_p75,
        })
        .collect();
    let (fit, fit_error) = match fit_scaling(&points) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(AnnealBenchResult {
        spec: spec.clone(),
        levels,
        fit,
        fit_error,
        rows,
    })
}
