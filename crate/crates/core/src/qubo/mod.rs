//! Factoring as quadratic unconstrained binary optimisation.
//!
//! Three builders are provided: the direct expansion of `(N - pq)^2` with
//! product ancillas, the long-multiplication circuit (MC) and the
//! controlled-full-adder grid (CFA). Every model has integer coefficients and
//! an offset chosen so the planted factorisation has energy exactly zero.

mod circuit;
mod encoding;
mod model;
mod poly;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::bit_length;

pub use circuit::{Gate, TileGrid, TileSpec};
pub use encoding::{decode_sample, FactorEncoding};
pub use model::{QuboModel, VariableRole};
pub use poly::{LinearForm, Poly, Signal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Mc,
    Cfa,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Direct => "direct",
            Method::Mc => "mc",
            Method::Cfa => "cfa",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "mc" => Ok(Method::Mc),
            "cfa" => Ok(Method::Cfa),
            _ => Err(Error::InvalidInput(format!(
                "unknown method {s:?} (direct|mc|cfa)"
            ))),
        }
    }
}

/// A factoring model together with what is needed to complete and decode it.
#[derive(Clone, Debug)]
pub struct FactoringQubo {
    pub n: u64,
    pub method: Method,
    pub model: QuboModel,
    pub encoding: FactorEncoding,
    /// Gates in topological order. For the direct method these are the
    /// product definitions `w_ik = p_i q_k` of the reduction ancillas.
    pub gates: Vec<Gate>,
    /// Present for the CFA method.
    pub tiles: Option<TileGrid>,
}

impl FactoringQubo {
    /// Fills every ancilla by forward evaluation from the factor bits
    /// already present in `x`.
    pub fn complete(&self, x: &mut [u8]) {
        for g in &self.gates {
            g.forward(x);
        }
    }

    /// Full assignment for the factor pair `(p, q)`.
    pub fn assignment_for(&self, p: u64, q: u64) -> Result<Vec<u8>> {
        let mut x = vec![0u8; self.model.num_vars()];
        self.encoding.write_factors(p, q, &mut x)?;
        self.complete(&mut x);
        Ok(x)
    }

    /// Energy of the forward-completed assignment for the given factor bits.
    pub fn energy_of_factor_bits(&self, bits: &[u8]) -> i128 {
        let mut x = vec![0u8; self.model.num_vars()];
        for (k, &v) in self
            .encoding
            .p_vars()
            .iter()
            .chain(self.encoding.q_vars())
            .enumerate()
        {
            x[v] = bits[k];
        }
        self.complete(&mut x);
        self.model.evaluate(&x)
    }

    pub fn n_ancillas(&self) -> usize {
        self.model.num_vars() - self.encoding.l()
    }
}

fn check_inputs(n: u64, l_p: u32, l_q: u32) -> Result<()> {
    if n % 2 == 0 || n < 9 {
        return Err(Error::InvalidInput(format!(
            "N = {n} must be odd and at least 9"
        )));
    }
    if l_p < 3 || l_q < 3 {
        return Err(Error::InvalidInput(format!(
            "factor lengths ({l_p}, {l_q}) must be at least 3"
        )));
    }
    let bits = bit_length(n);
    let sum = l_p + l_q;
    if sum < bits || sum > bits + 2 || sum > 64 {
        return Err(Error::InvalidInput(format!(
            "l_p + l_q = {sum} inconsistent with a {bits}-bit N"
        )));
    }
    Ok(())
}

/// `(N - pq)^2` with every unknown product `p_i q_k` replaced by an ancilla.
pub fn build_direct(n: u64, l_p: u32, l_q: u32) -> Result<FactoringQubo> {
    check_inputs(n, l_p, l_q)?;
    let encoding = FactorEncoding::standard(l_p, l_q)?;
    let (lps, lqs) = (encoding.l_p_star(), encoding.l_q_star());
    let mut roles: Vec<VariableRole> = (1..=lps as u32)
        .map(VariableRole::FactorP)
        .chain((1..=lqs as u32).map(VariableRole::FactorQ))
        .collect();
    let p_sig = |i: usize| {
        if i == 0 || i == l_p as usize - 1 {
            Signal::one()
        } else {
            Signal::Var(encoding.p_var(i))
        }
    };
    let q_sig = |k: usize| {
        if k == 0 || k == l_q as usize - 1 {
            Signal::one()
        } else {
            Signal::Var(encoding.q_var(k))
        }
    };
    let mut gates = Vec::new();
    let mut form = LinearForm::default();
    form.constant = n as i128;
    for i in 0..l_p as usize {
        for k in 0..l_q as usize {
            let w = 1i128 << (i + k);
            let prod = match (p_sig(i), q_sig(k)) {
                (Signal::Const(_), s) | (s, Signal::Const(_)) => s,
                (a, b) => {
                    roles.push(VariableRole::Reduction(i as u32, k as u32));
                    let out = Signal::Var(roles.len() - 1);
                    gates.push(Gate::And { a, b, out });
                    out
                }
            };
            form.add_signal(prod, -w);
        }
    }
    let mut poly = Poly::default();
    poly.add_square(&form, 1);
    let square = poly.clone();
    for g in &gates {
        if let Gate::And {
            a: Signal::Var(a),
            b: Signal::Var(b),
            out: Signal::Var(w),
        } = *g
        {
            let lambda = 1 + 2 * square.max_abs_incident(w);
            poly.add_and(a, b, w, lambda);
        }
    }
    let model = poly.into_model(roles, "direct")?;
    Ok(FactoringQubo {
        n,
        method: Method::Direct,
        model,
        encoding,
        gates,
        tiles: None,
    })
}

fn from_circuit(
    n: u64,
    l_p: u32,
    l_q: u32,
    method: Method,
    c: circuit::Circuit,
) -> Result<FactoringQubo> {
    let poly = circuit::circuit_poly(&c)?;
    let encoding = FactorEncoding::standard(l_p, l_q)?;
    let tiles = (method == Method::Cfa).then(|| circuit::tile_grid(&c, l_p, l_q));
    let model = poly.into_model(c.roles, "circuit")?;
    Ok(FactoringQubo {
        n,
        method,
        model,
        encoding,
        gates: c.gates,
        tiles,
    })
}

pub fn build_mc(n: u64, l_p: u32, l_q: u32) -> Result<FactoringQubo> {
    check_inputs(n, l_p, l_q)?;
    from_circuit(n, l_p, l_q, Method::Mc, circuit::mc_circuit(n, l_p, l_q))
}

pub fn build_cfa(n: u64, l_p: u32, l_q: u32) -> Result<FactoringQubo> {
    check_inputs(n, l_p, l_q)?;
    from_circuit(n, l_p, l_q, Method::Cfa, circuit::cfa_circuit(n, l_p, l_q))
}

pub fn build(method: Method, n: u64, l_p: u32, l_q: u32) -> Result<FactoringQubo> {
    match method {
        Method::Direct => build_direct(n, l_p, l_q),
        Method::Mc => build_mc(n, l_p, l_q),
        Method::Cfa => build_cfa(n, l_p, l_q),
    }
}

/// Largest unknown-bit count [`factor_bit_census`] enumerates.
pub const CENSUS_MAX_BITS: usize = 26;

/// Energies over every factor-bit assignment with forward-completed
/// ancillas.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorBitCensus {
    pub assignments: u64,
    pub min_energy: i128,
    /// Decoded `(p, q)` of every assignment at `min_energy`, sorted.
    pub minimisers: Vec<(u64, u64)>,
    /// Lowest energy among assignments not at the minimum.
    pub next_energy: Option<i128>,
}

/// Enumerates all `2^l` factor-bit assignments. Forward completion is the
/// optimal ancilla choice for every builder: any other ancilla value pays a
/// gate or reduction penalty of at least 1 on top of a non-negative rest.
pub fn factor_bit_census(f: &FactoringQubo) -> Result<FactorBitCensus> {
    let l = f.encoding.l();
    if l > CENSUS_MAX_BITS {
        return Err(Error::CostCapExceeded(format!(
            "factor-bit census over {l} bits (cap {CENSUS_MAX_BITS})"
        )));
    }
    let vars: Vec<usize> = f
        .encoding
        .p_vars()
        .iter()
        .chain(f.encoding.q_vars())
        .copied()
        .collect();
    let mut x = vec![0u8; f.model.num_vars()];
    let mut energies = Vec::with_capacity(1 << l);
    for k in 0u64..1 << l {
        for (b, &v) in vars.iter().enumerate() {
            x[v] = (k >> b & 1) as u8;
        }
        f.complete(&mut x);
        energies.push((f.model.evaluate(&x), f.encoding.decode(&x)));
    }
    let min_energy = energies
        .iter()
        .map(|e| e.0)
        .min()
        .expect("at least one assignment");
    let mut minimisers: Vec<(u64, u64)> = energies
        .iter()
        .filter(|e| e.0 == min_energy)
        .map(|e| e.1)
        .collect();
    minimisers.sort_unstable();
    let next_energy = energies
        .iter()
        .map(|e| e.0)
        .filter(|&e| e > min_energy)
        .min();
    Ok(FactorBitCensus {
        assignments: 1 << l,
        min_energy,
        minimisers,
        next_energy,
    })
}

pub fn evaluate_energy(model: &QuboModel, assignment: &[u8]) -> i128 {
    model.evaluate(assignment)
}

/// `ab - 2(a + b)z + 3z` over variables `(a, b, z) = (0, 1, 2)`.
pub fn and_penalty() -> Poly {
    Gate::And {
        a: Signal::Var(0),
        b: Signal::Var(1),
        out: Signal::Var(2),
    }
    .penalty()
}

/// `(a + b - s - 2c)^2` over `(a, b, s, c) = (0, 1, 2, 3)`.
pub fn half_adder_penalty() -> Poly {
    Gate::Adder {
        inputs: vec![Signal::Var(0), Signal::Var(1)],
        sum: Signal::Var(2),
        carry: Signal::Var(3),
    }
    .penalty()
}

/// `(a + b + c_in - s - 2 c_out)^2` over `(a, b, c_in, s, c_out) = (0..5)`.
pub fn full_adder_penalty() -> Poly {
    Gate::Adder {
        inputs: vec![Signal::Var(0), Signal::Var(1), Signal::Var(2)],
        sum: Signal::Var(3),
        carry: Signal::Var(4),
    }
    .penalty()
}

/// Controlled full adder `q p + s_in + c_in = s_out + 2 c_out` over
/// `(q, p, s_in, c_in, s_out, c_out, z) = (0..7)`, `z` the local product ancilla.
pub fn cfa_tile_penalty() -> Poly {
    let mut poly = Gate::And {
        a: Signal::Var(0),
        b: Signal::Var(1),
        out: Signal::Var(6),
    }
    .penalty();
    Gate::Adder {
        inputs: vec![Signal::Var(6), Signal::Var(2), Signal::Var(3)],
        sum: Signal::Var(4),
        carry: Signal::Var(5),
    }
    .add_penalty(&mut poly);
    poly
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exhaustive_min(model: &QuboModel) -> (i128, Vec<Vec<u8>>) {
        let n = model.num_vars();
        let mut best = i128::MAX;
        let mut argmin = Vec::new();
        for bits in 0u64..1 << n {
            let x: Vec<u8> = (0..n).map(|i| ((bits >> i) & 1) as u8).collect();
            let e = model.evaluate(&x);
            if e < best {
                best = e;
                argmin.clear();
            }
            if e == best {
                argmin.push(x);
            }
        }
        (best, argmin)
    }

    fn truth_table_gap(poly: &Poly, nvars: usize, valid: impl Fn(&[u8]) -> bool) {
        for bits in 0u32..1 << nvars {
            let x: Vec<u8> = (0..nvars).map(|i| ((bits >> i) & 1) as u8).collect();
            let e = poly.evaluate(&x);
            if valid(&x) {
                assert_eq!(e, 0, "valid row {x:?}");
            } else {
                assert!(e >= 1, "invalid row {x:?} has energy {e}");
            }
        }
    }

    #[test]
    fn gate_truth_tables() {
        let and = and_penalty();
        truth_table_gap(&and, 3, |x| x[2] == x[0] & x[1]);
        assert_eq!(and.evaluate(&[1, 1, 0]), 1);
        assert_eq!(and.evaluate(&[0, 0, 1]), 3);
        truth_table_gap(&half_adder_penalty(), 4, |x| x[0] + x[1] == x[2] + 2 * x[3]);
        truth_table_gap(&full_adder_penalty(), 5, |x| {
            x[0] + x[1] + x[2] == x[3] + 2 * x[4]
        });
    }

    #[test]
    fn cfa_tile_truth_table() {
        let tile = cfa_tile_penalty();
        let valid = |x: &[u8]| x[0] * x[1] + x[2] + x[3] == x[4] + 2 * x[5];
        let mut valid_rows = 0;
        for bits in 0u32..64 {
            let x: Vec<u8> = (0..6).map(|i| ((bits >> i) & 1) as u8).collect();
            let min = (0..2)
                .map(|z| {
                    let mut y = x.clone();
                    y.push(z);
                    tile.evaluate(&y)
                })
                .min()
                .unwrap();
            if valid(&x) {
                valid_rows += 1;
                assert_eq!(min, 0);
            } else {
                assert!(min >= 1);
            }
        }
        assert_eq!(valid_rows, 16);
        // With the ancilla included, zero exactly when it carries the product.
        truth_table_gap(&tile, 7, |x| x[6] == x[0] & x[1] && valid(x));
    }

    #[test]
    fn direct_n25() {
        let f = build_direct(25, 3, 3).unwrap();
        assert_eq!(f.model.num_vars(), 3);
        let (min, argmin) = exhaustive_min(&f.model);
        assert_eq!(min, 0);
        assert_eq!(argmin, vec![vec![0, 0, 0]]);
        assert_eq!(decode_sample(&argmin[0], &f.encoding), (5, 5));
    }

    #[test]
    fn direct_n35_swap_degeneracy() {
        let f = build_direct(35, 3, 3).unwrap();
        let (min, argmin) = exhaustive_min(&f.model);
        assert_eq!(min, 0);
        let mut decoded: Vec<_> = argmin
            .iter()
            .map(|x| decode_sample(x, &f.encoding))
            .collect();
        decoded.sort_unstable();
        assert_eq!(decoded, vec![(5, 7), (7, 5)]);
        for x in &argmin {
            assert_eq!(x[2], x[0] & x[1]);
        }
    }

    #[test]
    fn direct_census_record() {
        let f = build_direct(1042441, 10, 10).unwrap();
        assert_eq!(f.model.num_vars(), 80);
        assert_eq!(
            f.model
                .role_count(|r| matches!(r, VariableRole::Reduction(..))),
            64
        );
    }

    #[test]
    fn circuits_n25() {
        for method in [Method::Mc, Method::Cfa] {
            let f = build(method, 25, 3, 3).unwrap();
            let (min, argmin) = exhaustive_min(&f.model);
            assert_eq!(min, 0, "{method}");
            for x in &argmin {
                assert_eq!(decode_sample(x, &f.encoding), (5, 5), "{method}");
            }
        }
    }

    #[test]
    fn mc_census() {
        for (n, lp, lq) in [
            (25u64, 3, 3),
            (1042441, 10, 10),
            (3548021, 15, 8),
            (143, 4, 4),
        ] {
            let f = build_mc(n, lp, lq).unwrap();
            let l = f.encoding.l();
            let n_and = f.model.role_count(|r| *r == VariableRole::And);
            let n_sum = f.model.role_count(|r| *r == VariableRole::Sum);
            let n_carry = f.model.role_count(|r| *r == VariableRole::Carry);
            assert_eq!(n_and, f.encoding.l_p_star() * f.encoding.l_q_star());
            assert_eq!(f.model.num_vars(), l + n_and + n_sum + n_carry);
        }
    }

    #[test]
    fn planted_energy_zero_and_decodes() {
        for method in [Method::Direct, Method::Mc, Method::Cfa] {
            let f = build(method, 3548021, 15, 8).unwrap();
            let x = f.assignment_for(21767, 163).unwrap();
            assert_eq!(f.model.evaluate(&x), 0, "{method}");
            assert_eq!(decode_sample(&x, &f.encoding), (21767, 163));
        }
    }

    #[test]
    fn cfa_tile_grid_shape() {
        let f = build_cfa(3548021, 15, 8).unwrap();
        let grid = f.tiles.as_ref().unwrap();
        assert_eq!(grid.tiles.len(), 7 * 15);
        for t in &grid.tiles {
            for &(a, b) in &t.couplers {
                assert!(t.vars.contains(&a) && t.vars.contains(&b));
            }
        }
        for &(i, j) in f.model.quadratic().keys() {
            assert!(grid.tiles.iter().any(|t| t.couplers.contains(&(i, j))));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_direct(24, 3, 3).is_err());
        assert!(build_direct(25, 2, 4).is_err());
        assert!(build_mc(25, 5, 5).is_err());
        assert!(build_cfa(3548021, 3, 3).is_err());
    }

    #[test]
    fn energy_examples() {
        let f = build_mc(143, 4, 4).unwrap();
        let zeros = vec![0u8; f.model.num_vars()];
        assert_eq!(evaluate_energy(&f.model, &zeros), f.model.offset() as i128);
    }

    #[test]
    fn census_n35_all_builders() {
        for method in [Method::Direct, Method::Mc, Method::Cfa] {
            let c = factor_bit_census(&build(method, 35, 3, 3).unwrap()).unwrap();
            assert_eq!(c.assignments, 4);
            assert_eq!(c.min_energy, 0);
            assert_eq!(c.minimisers, vec![(5, 7), (7, 5)], "{method}");
            assert!(c.next_energy.unwrap() >= 1);
        }
        let big = build_direct(1042441, 15, 15);
        assert!(big.is_err() || factor_bit_census(&big.unwrap()).is_err());
    }
}
