use proptest::prelude::*;
use qfactor_core::harness::splits;
use qfactor_core::numtheory::random_semiprime;
use qfactor_core::qubo::{build, factor_bit_census, FactoringQubo, Method};
use qfactor_core::samplers::solve_exhaustive;

const METHODS: [Method; 3] = [Method::Direct, Method::Mc, Method::Cfa];

fn problems(count: u64, max_l: u32) -> impl Iterator<Item = (u64, u64, u32, u32)> {
    (0..count).map(move |i| {
        let l = 2 + (i as u32 % (max_l - 1));
        let (lp, lq) = splits(l, false)[0];
        let s = random_semiprime(lp + 2, lq + 2, 1000 + i).unwrap();
        (s.p, s.q, lp + 2, lq + 2)
    })
}

fn expected(f: &FactoringQubo, p: u64, q: u64) -> Vec<(u64, u64)> {
    let mut v: Vec<(u64, u64)> = [(p, q), (q, p)]
        .into_iter()
        .filter(|&(a, b)| f.encoding.fits(a, b))
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

#[test]
fn census_certifies_planted_factors() {
    for method in METHODS {
        for (p, q, lp, lq) in problems(12, 12) {
            let f = build(method, p * q, lp, lq).unwrap();
            let c = factor_bit_census(&f).unwrap();
            assert_eq!(c.min_energy, 0, "{method} N={}", p * q);
            assert_eq!(c.minimisers, expected(&f, p, q), "{method} N={}", p * q);
            if let Some(e) = c.next_energy {
                assert!(e >= 1);
            }
        }
    }
}

#[test]
fn small_models_match_full_exhaustive_search() {
    let mut checked = 0;
    for method in METHODS {
        for (p, q, lp, lq) in problems(20, 6) {
            let f = build(method, p * q, lp, lq).unwrap();
            if f.model.num_vars() > 22 {
                continue;
            }
            let sol = solve_exhaustive(&f.model).unwrap();
            assert_eq!(sol.min_energy, 0);
            let mut pairs: Vec<(u64, u64)> = sol
                .minimisers
                .iter()
                .map(|x| f.encoding.decode(x))
                .collect();
            pairs.sort_unstable();
            pairs.dedup();
            assert_eq!(pairs, expected(&f, p, q), "{method} N={}", p * q);
            checked += 1;
        }
    }
    assert!(checked >= 20);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Random full assignments never go below zero, and zero means a true
    /// factorisation.
    #[test]
    fn energies_nonnegative(m in 0usize..3, i in 0u64..30, bits in prop::collection::vec(0u8..2, 400)) {
        let (p, q, lp, lq) = problems(30, 12).nth(i as usize).unwrap();
        let f = build(METHODS[m], p * q, lp, lq).unwrap();
        let x = &bits[..f.model.num_vars()];
        let e = f.model.evaluate(x);
        prop_assert!(e >= 0);
        if e == 0 {
            let (a, b) = f.encoding.decode(x);
            prop_assert_eq!(a * b, p * q);
        }
    }
}
