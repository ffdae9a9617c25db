use crate::error::{Error, Result};
use crate::qubo::QuboModel;
use crate::samplers::{SampleInfo, SampleSet};

/// Largest model [`solve_exhaustive`] accepts.
pub const EXHAUSTIVE_MAX_VARS: usize = 30;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExhaustiveSolution {
    pub min_energy: i128,
    /// Every minimising assignment, in increasing lexicographic order.
    pub minimisers: Vec<Vec<u8>>,
}

impl ExhaustiveSolution {
    /// Splits `num_reads` evenly over the minimisers; the first ones take the
    /// remainder and minimisers left with no reads are dropped.
    pub fn split_reads(&self, num_reads: u64) -> Vec<(&[u8], u64)> {
        let k = self.minimisers.len() as u64;
        self.minimisers
            .iter()
            .enumerate()
            .map(|(i, x)| {
                (
                    x.as_slice(),
                    num_reads / k + u64::from((i as u64) < num_reads % k),
                )
            })
            .filter(|e| e.1 > 0)
            .collect()
    }
}

/// Every read lands on a ground state, spread evenly over all of them.
pub fn sample_exhaustive(model: &QuboModel, num_reads: u64) -> Result<SampleSet> {
    let sol = solve_exhaustive(model)?;
    let entries = sol
        .split_reads(num_reads)
        .into_iter()
        .map(|(x, occ)| (x.to_vec(), occ, None));
    let info = SampleInfo {
        sampler: "exhaustive".into(),
        ..Default::default()
    };
    SampleSet::from_counts(model, entries, info)
}

/// Enumerates all `2^n` assignments in Gray-code order, updating the energy
/// by single-bit deltas.
pub fn solve_exhaustive(model: &QuboModel) -> Result<ExhaustiveSolution> {
    let n = model.num_vars();
    if n > EXHAUSTIVE_MAX_VARS {
        return Err(Error::CostCapExceeded(format!(
            "exhaustive search over {n} variables (cap {EXHAUSTIVE_MAX_VARS})"
        )));
    }
    let adj = model.adjacency();
    let mut field: Vec<i128> = model.linear().iter().map(|&a| a as i128).collect();
    let mut x = vec![0u8; n];
    let mut energy = model.offset() as i128;
    let mut best = energy;
    let mut minimisers = vec![x.clone()];
    for k in 1u64..1u64 << n {
        let i = k.trailing_zeros() as usize;
        let up = x[i] == 0;
        energy += if up { field[i] } else { -field[i] };
        x[i] ^= 1;
        for &(j, b) in &adj[i] {
            field[j] += if up { b as i128 } else { -(b as i128) };
        }
        if energy < best {
            best = energy;
            minimisers.clear();
        }
        if energy == best {
            minimisers.push(x.clone());
        }
    }
    minimisers.sort_unstable();
    Ok(ExhaustiveSolution {
        min_energy: best,
        minimisers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::{build_direct, decode_sample, VariableRole};
    use proptest::prelude::*;

    #[test]
    fn trivial_models() {
        let empty = QuboModel::new(vec![], 7, []).unwrap();
        let s = solve_exhaustive(&empty).unwrap();
        assert_eq!((s.min_energy, s.minimisers), (7, vec![vec![]]));
        let one = QuboModel::new(vec![VariableRole::And], 2, [(0, 0, -1)]).unwrap();
        let s = solve_exhaustive(&one).unwrap();
        assert_eq!((s.min_energy, s.minimisers), (1, vec![vec![1]]));
    }

    #[test]
    fn direct_n25() {
        let f = build_direct(25, 3, 3).unwrap();
        let s = solve_exhaustive(&f.model).unwrap();
        assert_eq!(s.min_energy, 0);
        for x in &s.minimisers {
            assert_eq!(decode_sample(x, &f.encoding), (5, 5));
        }
    }

    #[test]
    fn cap() {
        let m = QuboModel::new(vec![VariableRole::And; 31], 0, []).unwrap();
        assert!(matches!(
            solve_exhaustive(&m),
            Err(Error::CostCapExceeded(_))
        ));
    }

    proptest! {
        #[test]
        fn matches_brute_force(n in 0usize..8, seed in any::<u64>()) {
            let mut s = seed;
            let mut next = || { s = crate::seed::mix64(s); (s % 11) as i64 - 5 };
            let mut terms = Vec::new();
            for i in 0..n {
                for j in i..n {
                    terms.push((i, j, next()));
                }
            }
            let m = QuboModel::new(vec![VariableRole::And; n], next(), terms).unwrap();
            let all: Vec<Vec<u8>> = (0..1u32 << n).map(|k| (0..n).map(|i| (k >> i & 1) as u8).collect()).collect();
            let min = all.iter().map(|x| m.evaluate(x)).min().unwrap();
            let mut want: Vec<Vec<u8>> = all.into_iter().filter(|x| m.evaluate(x) == min).collect();
            want.sort();
            let got = solve_exhaustive(&m).unwrap();
            prop_assert_eq!(got.min_energy, min);
            prop_assert_eq!(got.minimisers, want);
        }
    }
}
