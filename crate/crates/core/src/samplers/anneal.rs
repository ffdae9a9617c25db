use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SampleInfo, SampleSet};
use crate::error::{Error, Result};
use crate::qubo::QuboModel;
use crate::seed::derive;

/// Energy unit the inverse temperatures refer to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyScale {
    /// The model's integer energies as they are.
    #[default]
    Raw,
    /// Energies divided by the largest absolute coefficient, as annealing
    /// hardware rescales its biases.
    MaxCoefficient,
}

/// Inverse temperatures interpolated geometrically from `beta_start` to
/// `beta_end` over `sweeps` full passes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub sweeps: u32,
    pub beta_start: f64,
    pub beta_end: f64,
    #[serde(default)]
    pub scale: EnergyScale,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            sweeps: 1000,
            beta_start: 0.1,
            beta_end: 10.0,
            scale: EnergyScale::default(),
        }
    }
}

impl AnnealSchedule {
    pub fn new(sweeps: u32, beta_start: f64, beta_end: f64) -> Result<Self> {
        let s = AnnealSchedule {
            sweeps,
            beta_start,
            beta_end,
            scale: EnergyScale::default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(Error::InvalidInput(
                "schedule needs at least one sweep".into(),
            ));
        }
        if !(self.beta_start > 0.0 && self.beta_end >= self.beta_start && self.beta_end.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "need 0 < beta_start <= beta_end, got {} and {}",
                self.beta_start, self.beta_end
            )));
        }
        Ok(())
    }

    pub fn with_scale(mut self, scale: EnergyScale) -> Self {
        self.scale = scale;
        self
    }

    /// Inverse temperature of every sweep in the schedule's own unit; a
    /// single sweep runs at `beta_end`.
    pub fn betas(&self) -> Vec<f64> {
        if self.sweeps == 1 {
            return vec![self.beta_end];
        }
        let ratio = self.beta_end / self.beta_start;
        let last = (self.sweeps - 1) as f64;
        (0..self.sweeps)
            .map(|k| self.beta_start * ratio.powf(k as f64 / last))
            .collect()
    }
}

/// Neighbour lists in compressed rows.
struct Csr {
    start: Vec<usize>,
    nbr: Vec<u32>,
    coef: Vec<i64>,
}

impl Csr {
    fn new(model: &QuboModel) -> Self {
        let adj = model.adjacency();
        let mut start = Vec::with_capacity(adj.len() + 1);
        let (mut nbr, mut coef) = (Vec::new(), Vec::new());
        start.push(0);
        for row in &adj {
            for &(j, b) in row {
                nbr.push(j as u32);
                coef.push(b);
            }
            start.push(nbr.len());
        }
        Csr { start, nbr, coef }
    }
}

/// Metropolis sweeps in variable order; `x` holds the start state and
/// receives the final one.
fn anneal(model: &QuboModel, csr: &Csr, betas: &[f64], x: &mut [u8], rng: &mut ChaCha8Rng) {
    let n = x.len();
    let mut field: Vec<i128> = model.linear().iter().map(|&a| a as i128).collect();
    for i in 0..n {
        if x[i] == 1 {
            for k in csr.start[i]..csr.start[i + 1] {
                field[csr.nbr[k] as usize] += csr.coef[k] as i128;
            }
        }
    }
    for &beta in betas {
        for i in 0..n {
            let up = x[i] == 0;
            let delta = if up { field[i] } else { -field[i] };
            let accept = delta <= 0 || {
                let cost = beta * delta as f64;
                cost < 64.0 && rng.random::<f64>() < (-cost).exp()
            };
            if accept {
                x[i] ^= 1;
                for k in csr.start[i]..csr.start[i + 1] {
                    let b = csr.coef[k] as i128;
                    field[csr.nbr[k] as usize] += if up { b } else { -b };
                }
            }
        }
    }
}

fn run(
    model: &QuboModel,
    schedule: &AnnealSchedule,
    initial: Option<&[u8]>,
    num_reads: u64,
    seed: u64,
) -> Result<SampleSet> {
    schedule.validate()?;
    if num_reads == 0 {
        return Err(Error::InvalidInput("num_reads must be at least 1".into()));
    }
    let n = model.num_vars();
    if initial.is_some_and(|x| x.len() != n) {
        return Err(Error::InvalidInput(
            "initial state has the wrong length".into(),
        ));
    }
    let csr = Csr::new(model);
    let unit = match schedule.scale {
        EnergyScale::MaxCoefficient => model.max_abs_coefficient().max(1) as f64,
        EnergyScale::Raw => 1.0,
    };
    let betas: Vec<f64> = schedule.betas().into_iter().map(|b| b / unit).collect();
    let reads: Vec<Vec<u8>> = (0..num_reads)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, &[r]));
            let mut x = match initial {
                Some(x) => x.to_vec(),
                None => (0..n).map(|_| rng.random_range(0..2u8)).collect(),
            };
            anneal(model, &csr, &betas, &mut x, &mut rng);
            x
        })
        .collect();
    let info = SampleInfo {
        sampler: "sa".into(),
        seed: Some(seed),
        schedule: Some(*schedule),
    };
    SampleSet::from_reads(model, reads, info)
}

/// Independent annealing runs from uniformly random states. Read `r` uses
/// a seed derived from `(seed, r)`, so results do not depend on threading.
pub fn sample_sa(
    model: &QuboModel,
    schedule: &AnnealSchedule,
    num_reads: u64,
    seed: u64,
) -> Result<SampleSet> {
    run(model, schedule, None, num_reads, seed)
}

/// As [`sample_sa`], with every read starting from `initial`.
pub fn sample_sa_from(
    model: &QuboModel,
    schedule: &AnnealSchedule,
    initial: &[u8],
    num_reads: u64,
    seed: u64,
) -> Result<SampleSet> {
    run(model, schedule, Some(initial), num_reads, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::{build_direct, VariableRole};
    use crate::samplers::solve_exhaustive;

    #[test]
    fn schedule_endpoints() {
        let b = AnnealSchedule::default().betas();
        assert_eq!(b.len(), 1000);
        assert!((b[0] - 0.1).abs() < 1e-12 && (b[999] - 10.0).abs() < 1e-9);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert!(AnnealSchedule::new(0, 1.0, 2.0).is_err());
        assert!(AnnealSchedule::new(5, 2.0, 1.0).is_err());
        assert!(AnnealSchedule::new(5, 0.0, 1.0).is_err());
    }

    #[test]
    fn finds_unique_ground_state() {
        let f = build_direct(25, 3, 3).unwrap();
        let exact = solve_exhaustive(&f.model).unwrap();
        assert_eq!(exact.minimisers.len(), 1);
        assert!(f.model.num_vars() <= 8);
        let s = sample_sa(&f.model, &AnnealSchedule::default(), 1000, 5).unwrap();
        let hits = s.fraction(|r| r.assignment == exact.minimisers[0]);
        assert!(hits >= 0.99, "{hits}");
        assert_eq!(s.num_reads(), 1000);
    }

    #[test]
    fn frozen_schedule_keeps_planted_state() {
        let f = build_direct(35, 3, 3).unwrap();
        let planted = f.assignment_for(5, 7).unwrap();
        let frozen = AnnealSchedule::new(10, 1e9, 1e9).unwrap();
        let s = sample_sa_from(&f.model, &frozen, &planted, 20, 1).unwrap();
        assert_eq!(s.records().len(), 1);
        assert_eq!(s.records()[0].assignment, planted);
    }

    #[test]
    fn deterministic_and_thread_invariant() {
        let m = QuboModel::new(
            vec![VariableRole::And; 6],
            0,
            [
                (0, 1, 3),
                (1, 2, -4),
                (2, 3, 2),
                (3, 4, -1),
                (4, 5, 5),
                (0, 0, -2),
                (5, 5, 1),
            ],
        )
        .unwrap();
        let sched = AnnealSchedule::new(50, 0.1, 3.0).unwrap();
        let a = sample_sa(&m, &sched, 300, 9).unwrap();
        let b = sample_sa(&m, &sched, 300, 9).unwrap();
        assert_eq!(a, b);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = one.install(|| sample_sa(&m, &sched, 300, 9).unwrap());
        assert_eq!(a, c);
        assert_ne!(a, sample_sa(&m, &sched, 300, 10).unwrap());
    }
}
