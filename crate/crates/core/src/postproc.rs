//! Classical post-processing of measured bitstrings.
//!
//! Categories, from narrowest to widest:
//!
//! * **Shor**: the largest convergent denominator below `N` is the true order
//!   `r*`, `r*` is even and `a^(r*/2) != -1 (mod N)`.
//! * **Lucky**: not Shor, but some single convergent denominator of the same
//!   outcome yields a factor through `gcd(a^floor(r/2) +- 1, N)`.
//! * **Extended**: a factor is found by sweeping every convergent denominator
//!   times a small multiplier, plus `gcd(a^m - 1, N)` on each candidate. The
//!   multiplier `c = 1` reproduces the lucky candidates, so the categories nest.
//! * **Peak**: the outcome lies within 1/2 of a multiple of `2^t / r*`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::{convergents, gcd, mod_pow, Semiprime};
use crate::shor::MeasurementRecord;

pub const DEFAULT_MULTIPLIER_BOUND: u64 = 64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeClassification {
    pub shor_success: bool,
    /// Factor from a single convergent while the Shor conditions fail.
    /// Disjoint from `shor_success`.
    pub lucky_success: bool,
    pub extended_success: bool,
    pub peak: bool,
    pub recovered_factor: Option<u64>,
    pub r_basic: u64,
}

impl OutcomeClassification {
    /// The union category reported as Shor+Lucky.
    pub fn shor_or_lucky(&self) -> bool {
        self.shor_success || self.lucky_success
    }
}

/// Ground truth the classifier checks outcomes against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truth {
    pub semiprime: Semiprime,
    pub order: u64,
}

/// Convergent denominators of `j / 2^t` that are below `n`, in increasing
/// order and without repeats.
pub fn candidate_denominators(j: u128, t: u32, n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    for c in convergents(j, t) {
        if c.denominator >= n as u128 {
            break;
        }
        let d = c.denominator as u64;
        if out.last() != Some(&d) {
            out.push(d);
        }
    }
    out
}

/// Largest convergent denominator of `j / 2^t` strictly below `n`.
pub fn basic_denominator(j: u128, t: u32, n: u64) -> u64 {
    candidate_denominators(j, t, n).last().copied().unwrap_or(1)
}

fn nontrivial(g: u64, n: u64) -> Option<u64> {
    (g > 1 && g < n).then(|| g.min(n / g))
}

/// `gcd(a^floor(r/2) +- 1, N)`; returns the smaller factor when either gcd is
/// a nontrivial divisor.
pub fn extract_factor(a: u64, r: u64, n: u64) -> Option<u64> {
    let x = mod_pow(a, r / 2, n);
    let plus = gcd((x + 1) % n, n);
    let minus = gcd((x + n - 1) % n, n);
    match (nontrivial(plus, n), nontrivial(minus, n)) {
        (Some(f), Some(g)) => Some(f.min(g)),
        (f, g) => f.or(g),
    }
}

/// Sweeps convergent denominators `r' < N` in increasing order and, for each,
/// multipliers `c = 1..=c_max`; every candidate `m = c * r'` is tried with
/// [`extract_factor`] and with `gcd(a^m - 1, N)`.
pub fn extended_postprocess(j: u128, t: u32, a: u64, n: u64, c_max: u64) -> Option<u64> {
    assert!(c_max >= 1, "multiplier bound must be positive");
    for r in candidate_denominators(j, t, n) {
        for c in 1..=c_max {
            let m = c * r;
            if let Some(f) = extract_factor(a, m, n) {
                return Some(f);
            }
            let g = gcd((mod_pow(a, m, n) + n - 1) % n, n);
            if let Some(f) = nontrivial(g, n) {
                return Some(f);
            }
        }
    }
    None
}

/// `true` when some integer `k` has `|j - k 2^t / r| <= 1/2`.
pub fn is_peak(j: u128, t: u32, r: u64) -> bool {
    let size = 1u128 << t;
    let r = r as u128;
    // 2 |j r - k 2^t| <= r for the nearest k, in exact integers.
    let rem = (j * r) % size;
    let diff = rem.min(size - rem);
    2 * diff <= r
}

/// Idealised peak outcome `round(k 2^t / r) mod 2^t`.
pub fn synthesize_outcome(k: u64, r: u64, t: u32) -> u128 {
    assert!(k < r, "k must be below r");
    let size = 1u128 << t;
    let num = k as u128 * size;
    let r128 = r as u128;
    ((num + r128 / 2) / r128) % size
}

/// Assigns the four categories to one measured outcome.
pub fn classify(
    record: &MeasurementRecord,
    a: u64,
    truth: &Truth,
    c_max: u64,
) -> Result<OutcomeClassification> {
    let n = truth.semiprime.n;
    let order = truth.order;
    if order == 0 || mod_pow(a, order, n) != 1 {
        return Err(Error::InconsistentTruth(format!(
            "{a}^{order} != 1 mod {n}"
        )));
    }
    let (j, t) = (record.j, record.t());
    let denominators = candidate_denominators(j, t, n);
    let r_basic = denominators.last().copied().unwrap_or(1);
    let basic_factor = extract_factor(a, r_basic, n);

    let conditions = r_basic == order && order % 2 == 0 && mod_pow(a, order / 2, n) != n - 1;
    let shor_success = conditions && basic_factor.is_some();

    let single = if shor_success {
        basic_factor
    } else {
        denominators.iter().find_map(|&r| extract_factor(a, r, n))
    };
    let lucky_success = !shor_success && single.is_some();

    let extended = if shor_success || lucky_success {
        single
    } else {
        extended_postprocess(j, t, a, n, c_max)
    };

    Ok(OutcomeClassification {
        shor_success,
        lucky_success,
        extended_success: extended.is_some(),
        peak: is_peak(j, t, order),
        recovered_factor: extended,
        r_basic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::multiplicative_order;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn truth(p: u64, q: u64, a: u64) -> Truth {
        let s = Semiprime::from_factors(p, q).unwrap();
        Truth {
            semiprime: s,
            order: multiplicative_order(a, &s).unwrap(),
        }
    }

    fn record(j: u128, t: u32) -> MeasurementRecord {
        MeasurementRecord::from_bits((0..t).map(|m| ((j >> m) & 1) as u8).collect(), 0)
    }

    /// Peak test by scanning every k with floating point.
    fn peak_scan(j: u128, t: u32, r: u64) -> bool {
        let size = (1u128 << t) as f64;
        (0..=r).any(|k| (j as f64 - k as f64 * size / r as f64).abs() <= 0.5 + 1e-9)
    }

    #[test]
    fn basic_denominator_examples() {
        assert_eq!(basic_denominator(192, 8, 15), 4);
        assert_eq!(basic_denominator(0, 8, 15), 1);
        // 85/256 = [0; 3, 85] -> 0/1, 1/3, 85/256
        let cs: Vec<_> = convergents(85, 8).iter().map(|c| c.denominator).collect();
        assert_eq!(cs, vec![1, 3, 256]);
        assert_eq!(basic_denominator(85, 8, 15), 3);
    }

    #[test]
    fn extract_factor_examples() {
        assert_eq!(extract_factor(7, 4, 15), Some(3));
        assert_eq!(extract_factor(7, 1, 15), None);
        // 14 = -1 mod 15 has order 2 and 14^1 = -1.
        assert_eq!(mod_pow(14, 1, 15), 14);
        assert_eq!(extract_factor(14, 2, 15), None);
        // Same situation on 21: 20 = -1.
        assert_eq!(extract_factor(20, 2, 21), None);
    }

    #[test]
    fn synthesize_examples() {
        assert_eq!(synthesize_outcome(3, 4, 8), 192);
        assert_eq!(synthesize_outcome(1, 6, 10), 171);
        assert_eq!(synthesize_outcome(0, 6, 10), 0);
    }

    #[test]
    fn classify_examples() {
        let tr = truth(3, 5, 7);
        let c = classify(&record(192, 8), 7, &tr, 64).unwrap();
        assert!(c.shor_success && c.peak);
        assert_eq!(c.recovered_factor, Some(3));

        let c = classify(&record(0, 8), 7, &tr, 64).unwrap();
        assert!(!c.shor_success && c.peak);

        let tr14 = truth(3, 5, 14);
        assert_eq!(tr14.order, 2);
        let c = classify(&record(128, 8), 14, &tr14, 64).unwrap();
        assert_eq!(c.r_basic, 2);
        assert!(!c.shor_success);
        assert!(c.peak);
        // Every candidate built from powers of 14 = -1 is +-1, so nothing works.
        assert!(!c.lucky_success && !c.extended_success);
    }

    #[test]
    fn classify_rejects_bad_truth() {
        let mut tr = truth(3, 5, 7);
        tr.order = 3;
        assert!(matches!(
            classify(&record(0, 8), 7, &tr, 64),
            Err(Error::InconsistentTruth(_))
        ));
    }

    #[test]
    fn extended_finds_factor_at_multiplier_two() {
        // N = 77, a = 2, r* = 30. k = 2 shares the factor 2 with r*, so the
        // convergents stop at 1/15; no single convergent gives a factor but
        // doubling the last one restores r*.
        let tr = truth(7, 11, 2);
        assert_eq!(tr.order, 30);
        let t = 14;
        let j = synthesize_outcome(2, 30, t);
        assert_eq!(j, 1092);
        assert_eq!(candidate_denominators(j, t, 77), vec![1, 15]);
        assert_eq!(extract_factor(2, 1, 77), None);
        assert_eq!(extract_factor(2, 15, 77), None);
        assert_eq!(extract_factor(2, 2 * 15, 77), Some(7));
        let c = classify(&record(j, t), 2, &tr, 64).unwrap();
        assert!(!c.shor_success && !c.lucky_success);
        assert!(c.extended_success);
        assert_eq!(c.r_basic, 15);
    }

    #[test]
    fn zero_outcome_extended_candidates() {
        // j = 0 leaves only r' = 1, so the sweep tries m = 1..=c_max. For
        // N = 15 the multiplier sweep reaches the small order of 7 anyway.
        let n = 15;
        let mut brute = None;
        'outer: for m in 1..=64u64 {
            let x = mod_pow(7, m / 2, n);
            for g in [
                gcd((x + 1) % n, n),
                gcd((x + n - 1) % n, n),
                gcd((mod_pow(7, m, n) + n - 1) % n, n),
            ] {
                if g > 1 && g < n {
                    brute = Some(g.min(n / g));
                    break 'outer;
                }
            }
        }
        assert_eq!(extended_postprocess(0, 8, 7, n, 64), brute);
        assert_eq!(brute, Some(3));
        // For a large order the multipliers cannot reach it.
        let big = Semiprime::from_factors(712321, 771781).unwrap();
        assert!(multiplicative_order(2, &big).unwrap() > 64);
        assert_eq!(extended_postprocess(0, 78, 2, big.n, 64), None);
    }

    #[test]
    fn peak_matches_scan() {
        for (t, r) in [(8u32, 4u64), (10, 6), (9, 7), (12, 10), (6, 5)] {
            for j in 0..(1u128 << t) {
                assert_eq!(is_peak(j, t, r), peak_scan(j, t, r), "j={j} t={t} r={r}");
            }
        }
    }

    #[test]
    fn synthesized_coprime_peaks_recover_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (p, q) in [(101u64, 103u64), (1009, 1013), (7919, 7927)] {
            let s = Semiprime::from_factors(p, q).unwrap();
            let t = 2 * s.bit_length_n;
            for _ in 0..20 {
                let a = loop {
                    let a = rng.random_range(2..s.n);
                    if gcd(a, s.n) == 1 {
                        break a;
                    }
                };
                let r = multiplicative_order(a, &s).unwrap();
                let k = loop {
                    let k = rng.random_range(0..r);
                    if gcd(k, r) == 1 {
                        break k;
                    }
                };
                let j = synthesize_outcome(k, r, t);
                assert_eq!(basic_denominator(j, t, s.n), r);
                assert!(is_peak(j, t, r));
            }
        }
    }

    proptest! {
        #[test]
        fn categories_nest(j in 0u128..(1 << 14), a_seed in 0u64..1000) {
            let s = Semiprime::from_factors(11, 13).unwrap();
            let a = (2..s.n).filter(|&a| gcd(a, s.n) == 1).nth((a_seed % 100) as usize).unwrap();
            let tr = Truth { semiprime: s, order: multiplicative_order(a, &s).unwrap() };
            let c = classify(&record(j, 14), a, &tr, 64).unwrap();
            prop_assert!(!(c.shor_success && c.lucky_success));
            if c.shor_or_lucky() {
                prop_assert!(c.extended_success);
            }
            if let Some(f) = c.recovered_factor {
                prop_assert!(f > 1 && f < s.n && s.n % f == 0);
            }
        }

        #[test]
        fn extracted_factors_divide(a in 2u64..10_000, r in 1u64..5_000) {
            let n = 101 * 103;
            if gcd(a, n) == 1 {
                if let Some(f) = extract_factor(a, r, n) {
                    prop_assert!(f > 1 && f < n && n % f == 0);
                }
            }
        }
    }
}
