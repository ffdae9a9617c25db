//! QUBO solvers and sample bookkeeping.
//!
//! Every [`SampleSet`] stores energies recomputed from the model with exact
//! integer arithmetic, whatever produced the assignments.

mod anneal;
mod exhaustive;
pub mod loopback;
mod remote;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{decode_sample, FactorEncoding, QuboModel};

pub use anneal::{sample_sa, sample_sa_from, AnnealSchedule, EnergyScale};
pub use exhaustive::{
    sample_exhaustive, solve_exhaustive, ExhaustiveSolution, EXHAUSTIVE_MAX_VARS,
};
pub use remote::{remote_sample, RemoteConfig, WireRequest, WireResponse};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub assignment: Vec<u8>,
    pub energy: i128,
    pub occurrences: u64,
    /// Set when a remote sampler claimed a different energy.
    #[serde(default)]
    pub flagged: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleInfo {
    pub sampler: String,
    pub seed: Option<u64>,
    pub schedule: Option<AnnealSchedule>,
}

/// Distinct assignments with occurrence counts, ordered by energy and then
/// assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    records: Vec<SampleRecord>,
    num_reads: u64,
    info: SampleInfo,
}

impl SampleSet {
    /// Aggregates raw reads.
    pub fn from_reads(
        model: &QuboModel,
        reads: impl IntoIterator<Item = Vec<u8>>,
        info: SampleInfo,
    ) -> Result<Self> {
        Self::from_counts(model, reads.into_iter().map(|r| (r, 1, None)), info)
    }

    /// Aggregates `(assignment, occurrences, claimed energy)` triples.
    /// Claimed energies are never stored; a claim that differs from the
    /// recomputed value flags the record.
    pub fn from_counts(
        model: &QuboModel,
        entries: impl IntoIterator<Item = (Vec<u8>, u64, Option<i128>)>,
        info: SampleInfo,
    ) -> Result<Self> {
        let entries = entries.into_iter().map(|(x, occ, claim)| {
            let flagged =
                claim.is_some_and(|e| x.len() == model.num_vars() && e != model.evaluate(&x));
            (x, occ, flagged)
        });
        Self::from_entries(model, entries, info)
    }

    pub(crate) fn from_entries(
        model: &QuboModel,
        entries: impl IntoIterator<Item = (Vec<u8>, u64, bool)>,
        info: SampleInfo,
    ) -> Result<Self> {
        let n = model.num_vars();
        let mut merged: BTreeMap<Vec<u8>, (u64, bool)> = BTreeMap::new();
        let mut num_reads = 0u64;
        for (x, occ, flagged) in entries {
            if x.len() != n || x.iter().any(|&b| b > 1) {
                return Err(Error::InvalidInput(format!(
                    "sample is not a 0/1 vector of length {n}"
                )));
            }
            if occ == 0 {
                return Err(Error::InvalidInput("sample with zero occurrences".into()));
            }
            let slot = merged.entry(x).or_insert((0, false));
            slot.0 += occ;
            slot.1 |= flagged;
            num_reads += occ;
        }
        let mut records: Vec<SampleRecord> = merged
            .into_iter()
            .map(|(assignment, (occurrences, flagged))| SampleRecord {
                energy: model.evaluate(&assignment),
                assignment,
                occurrences,
                flagged,
            })
            .collect();
        records.sort_by(|a, b| {
            a.energy
                .cmp(&b.energy)
                .then_with(|| a.assignment.cmp(&b.assignment))
        });
        Ok(SampleSet {
            records,
            num_reads,
            info,
        })
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn num_reads(&self) -> u64 {
        self.num_reads
    }

    pub fn info(&self) -> &SampleInfo {
        &self.info
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn lowest_energy(&self) -> Option<i128> {
        self.records.first().map(|r| r.energy)
    }

    pub fn num_flagged(&self) -> usize {
        self.records.iter().filter(|r| r.flagged).count()
    }

    /// Occurrence-weighted fraction of reads satisfying `pred`.
    pub fn fraction(&self, mut pred: impl FnMut(&SampleRecord) -> bool) -> f64 {
        if self.num_reads == 0 {
            return 0.0;
        }
        let hits: u64 = self
            .records
            .iter()
            .filter(|r| pred(r))
            .map(|r| r.occurrences)
            .sum();
        hits as f64 / self.num_reads as f64
    }
}

/// Fraction of reads whose factor bits multiply to `n`; ancilla bits are
/// ignored.
pub fn success_frequency(samples: &SampleSet, encoding: &FactorEncoding, n: u64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("empty sample set".into()));
    }
    Ok(samples.fraction(|r| {
        let (p, q) = decode_sample(&r.assignment, encoding);
        p as u128 * q as u128 == n as u128
    }))
}

/// Fraction of reads at energy exactly zero, the ground energy of every
/// factoring model.
pub fn global_minimum_frequency(samples: &SampleSet, model: &QuboModel) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("empty sample set".into()));
    }
    if samples.records[0].assignment.len() != model.num_vars() {
        return Err(Error::InvalidInput("samples do not match the model".into()));
    }
    Ok(samples.fraction(|r| model.evaluate(&r.assignment) == 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::{build_direct, build_mc, VariableRole};

    #[test]
    fn aggregation_recomputes_and_flags() {
        let m = QuboModel::new(vec![VariableRole::And; 2], 3, [(0, 0, -2), (0, 1, 5)]).unwrap();
        let s = SampleSet::from_counts(
            &m,
            [
                (vec![1, 0], 2, Some(1)),
                (vec![1, 1], 1, Some(0)),
                (vec![1, 0], 3, None),
            ],
            SampleInfo::default(),
        )
        .unwrap();
        assert_eq!(s.num_reads(), 6);
        assert_eq!(s.records().len(), 2);
        assert_eq!(
            (
                s.records()[0].energy,
                s.records()[0].occurrences,
                s.records()[0].flagged
            ),
            (1, 5, false)
        );
        assert_eq!((s.records()[1].energy, s.records()[1].flagged), (6, true));
        assert!(SampleSet::from_reads(&m, [vec![2, 0]], SampleInfo::default()).is_err());
    }

    #[test]
    fn frequencies() {
        let f = build_direct(35, 3, 3).unwrap();
        let good = f.assignment_for(5, 7).unwrap();
        let mut bad = good.clone();
        bad[f.encoding.p_var(1)] ^= 1;
        let planted =
            SampleSet::from_reads(&f.model, vec![good.clone(); 4], SampleInfo::default()).unwrap();
        assert_eq!(success_frequency(&planted, &f.encoding, 35).unwrap(), 1.0);
        assert_eq!(global_minimum_frequency(&planted, &f.model).unwrap(), 1.0);
        let none = SampleSet::from_reads(&f.model, vec![bad; 3], SampleInfo::default()).unwrap();
        assert_eq!(success_frequency(&none, &f.encoding, 35).unwrap(), 0.0);
        assert_eq!(global_minimum_frequency(&none, &f.model).unwrap(), 0.0);

        let mut reads = vec![good.clone(); 37];
        let mut other = good;
        other[f.encoding.q_var(1)] ^= 1;
        reads.extend(std::iter::repeat_n(other, 10000 - 37));
        let s = SampleSet::from_reads(&f.model, reads, SampleInfo::default()).unwrap();
        assert!((success_frequency(&s, &f.encoding, 35).unwrap() - 0.0037).abs() < 1e-15);
    }

    #[test]
    fn wrong_carry_counts_as_success_only() {
        let f = build_mc(35, 3, 3).unwrap();
        let mut x = f.assignment_for(5, 7).unwrap();
        let ancilla = (0..x.len())
            .find(|&v| !f.model.roles()[v].is_factor_bit())
            .unwrap();
        x[ancilla] ^= 1;
        assert!(f.model.evaluate(&x) > 0);
        let s = SampleSet::from_reads(&f.model, [x], SampleInfo::default()).unwrap();
        assert_eq!(success_frequency(&s, &f.encoding, 35).unwrap(), 1.0);
        assert_eq!(global_minimum_frequency(&s, &f.model).unwrap(), 0.0);
    }
}
