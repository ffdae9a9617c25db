//! Gate-level multiplier circuits: the long-multiplication (MC) array and the
//! controlled-full-adder (CFA) tile grid.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::model::VariableRole;
use super::poly::{LinearForm, Poly, Signal};

/// One constraint of the circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gate {
    /// `out = a AND b`.
    And { a: Signal, b: Signal, out: Signal },
    /// `sum(inputs) = sum + 2 carry`: a half adder with two inputs, a full
    /// adder with three. A single input with constant outputs pins a bit.
    Adder {
        inputs: Vec<Signal>,
        sum: Signal,
        carry: Signal,
    },
}

fn add_product(poly: &mut Poly, a: Signal, b: Signal, c: i128) {
    match (a, b) {
        (Signal::Const(x), Signal::Const(y)) => poly.add_const(if x && y { c } else { 0 }),
        (Signal::Const(true), Signal::Var(v)) | (Signal::Var(v), Signal::Const(true)) => {
            poly.add_linear(v, c)
        }
        (Signal::Const(false), _) | (_, Signal::Const(false)) => {}
        (Signal::Var(u), Signal::Var(v)) => poly.add_quadratic(u, v, c),
    }
}

impl Gate {
    pub fn add_penalty(&self, poly: &mut Poly) {
        match self {
            Gate::And { a, b, out } => {
                add_product(poly, *a, *b, 1);
                add_product(poly, *a, *out, -2);
                add_product(poly, *b, *out, -2);
                add_product(poly, *out, Signal::one(), 3);
            }
            Gate::Adder { inputs, sum, carry } => {
                let mut form = LinearForm::default();
                for &s in inputs {
                    form.add_signal(s, 1);
                }
                form.add_signal(*sum, -1);
                form.add_signal(*carry, -2);
                poly.add_square(&form, 1);
            }
        }
    }

    pub fn penalty(&self) -> Poly {
        let mut p = Poly::default();
        self.add_penalty(&mut p);
        p
    }

    pub fn is_satisfied(&self, x: &[u8]) -> bool {
        match self {
            Gate::And { a, b, out } => out.value(x) == a.value(x) & b.value(x),
            Gate::Adder { inputs, sum, carry } => {
                let total: u32 = inputs.iter().map(|s| s.value(x) as u32).sum();
                total == sum.value(x) as u32 + 2 * carry.value(x) as u32
            }
        }
    }

    /// Sets the gate's variable outputs from its inputs.
    pub fn forward(&self, x: &mut [u8]) {
        match self {
            Gate::And { a, b, out } => {
                if let Signal::Var(v) = *out {
                    x[v] = a.value(x) & b.value(x);
                }
            }
            Gate::Adder { inputs, sum, carry } => {
                let total: u32 = inputs.iter().map(|s| s.value(x) as u32).sum();
                if let Signal::Var(v) = *sum {
                    x[v] = (total & 1) as u8;
                }
                if let Signal::Var(v) = *carry {
                    x[v] = (total >> 1) as u8;
                }
            }
        }
    }

    fn signals_mut(&mut self) -> Vec<&mut Signal> {
        match self {
            Gate::And { a, b, out } => vec![a, b, out],
            Gate::Adder { inputs, sum, carry } => {
                let mut v: Vec<&mut Signal> = inputs.iter_mut().collect();
                v.push(sum);
                v.push(carry);
                v
            }
        }
    }

    pub fn vars(&self) -> Vec<usize> {
        let mut g = self.clone();
        g.signals_mut()
            .into_iter()
            .filter_map(|s| match *s {
                Signal::Var(v) => Some(v),
                Signal::Const(_) => None,
            })
            .collect()
    }
}

/// One CFA tile: row `i` (the `q_i` bit), column `j` (the `p_j` bit).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileSpec {
    pub row: u32,
    pub col: u32,
    /// Indices into the circuit's gate list.
    pub gates: Vec<usize>,
    /// Model variables the tile touches.
    pub vars: Vec<usize>,
    /// Variable pairs coupled by this tile's penalty.
    pub couplers: Vec<(usize, usize)>,
    /// Model variable of `p_col`, unless the bit is constant.
    pub p: Option<usize>,
    /// Model variable of `q_row`, unless the bit is constant.
    pub q: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileGrid {
    pub l_p: u32,
    pub l_q: u32,
    /// Row-major over rows `1..l_q` and columns `0..l_p`.
    pub tiles: Vec<TileSpec>,
}

impl TileGrid {
    pub fn tile(&self, row: u32, col: u32) -> Option<&TileSpec> {
        self.tiles.iter().find(|t| t.row == row && t.col == col)
    }
}

pub(crate) struct CircuitBuilder {
    roles: Vec<VariableRole>,
    gates: Vec<Gate>,
    fixed: HashMap<usize, bool>,
    tiles: Vec<(u32, u32, Vec<usize>)>,
}

pub(crate) struct Circuit {
    pub roles: Vec<VariableRole>,
    pub gates: Vec<Gate>,
    pub tiles: Vec<(u32, u32, Vec<usize>)>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        CircuitBuilder {
            roles: Vec::new(),
            gates: Vec::new(),
            fixed: HashMap::new(),
            tiles: Vec::new(),
        }
    }

    pub fn var(&mut self, role: VariableRole) -> Signal {
        self.roles.push(role);
        Signal::Var(self.roles.len() - 1)
    }

    /// Factor bit signals `[1, x_1, ..., x_{l-2}, 1]`.
    pub fn factor_bits(&mut self, l: u32, role: fn(u32) -> VariableRole) -> Vec<Signal> {
        let mut bits = vec![Signal::one()];
        for i in 1..l - 1 {
            bits.push(self.var(role(i)));
        }
        bits.push(Signal::one());
        bits
    }

    pub fn and(&mut self, a: Signal, b: Signal) -> Signal {
        match (a, b) {
            (Signal::Const(false), _) | (_, Signal::Const(false)) => Signal::zero(),
            (Signal::Const(true), s) | (s, Signal::Const(true)) => s,
            _ => {
                let out = self.var(VariableRole::And);
                self.gates.push(Gate::And { a, b, out });
                out
            }
        }
    }

    /// Adds `inputs` with an optional pinned sum; returns `(sum, carry)`.
    pub fn adder(&mut self, inputs: &[Signal], pinned_sum: Option<bool>) -> (Signal, Signal) {
        let inputs: Vec<Signal> = inputs
            .iter()
            .copied()
            .filter(|s| *s != Signal::zero())
            .collect();
        let all_const = inputs.iter().all(|s| s.as_const().is_some());
        if all_const {
            let total = inputs.len() as u32;
            let (sum, carry) = (
                Signal::Const(total & 1 == 1),
                Signal::Const(total >> 1 == 1),
            );
            if let Some(b) = pinned_sum {
                if sum != Signal::Const(b) {
                    // Unsatisfiable: the constant penalty keeps every state above zero.
                    self.gates.push(Gate::Adder {
                        inputs,
                        sum: Signal::Const(b),
                        carry,
                    });
                }
            }
            return (sum, carry);
        }
        if inputs.len() == 1 {
            match pinned_sum {
                None => return (inputs[0], Signal::zero()),
                Some(b) => {
                    self.pin(inputs[0], b);
                    return (Signal::Const(b), Signal::zero());
                }
            }
        }
        let sum = match pinned_sum {
            Some(b) => Signal::Const(b),
            None => self.var(VariableRole::Sum),
        };
        let carry = self.var(VariableRole::Carry);
        self.gates.push(Gate::Adder { inputs, sum, carry });
        (sum, carry)
    }

    /// Forces `s = b`: ancillas are eliminated, factor bits get a linear
    /// penalty, constants are checked.
    pub fn pin(&mut self, s: Signal, b: bool) {
        match s {
            Signal::Const(c) => {
                if c != b {
                    self.gates.push(Gate::Adder {
                        inputs: vec![s],
                        sum: Signal::Const(b),
                        carry: Signal::zero(),
                    });
                }
            }
            Signal::Var(v) if self.roles[v].is_factor_bit() => {
                self.gates.push(Gate::Adder {
                    inputs: vec![s],
                    sum: Signal::Const(b),
                    carry: Signal::zero(),
                });
            }
            Signal::Var(v) => {
                self.fixed.insert(v, b);
            }
        }
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn record_tile(&mut self, row: u32, col: u32, first_gate: usize) {
        let gates = (first_gate..self.gates.len()).collect();
        self.tiles.push((row, col, gates));
    }

    /// Substitutes pinned variables and renumbers the survivors in creation order.
    pub fn finish(mut self) -> Circuit {
        let mut map = vec![usize::MAX; self.roles.len()];
        let mut roles = Vec::with_capacity(self.roles.len());
        for (v, role) in self.roles.iter().enumerate() {
            if !self.fixed.contains_key(&v) {
                map[v] = roles.len();
                roles.push(*role);
            }
        }
        for g in &mut self.gates {
            for s in g.signals_mut() {
                if let Signal::Var(v) = *s {
                    *s = match self.fixed.get(&v) {
                        Some(&b) => Signal::Const(b),
                        None => Signal::Var(map[v]),
                    };
                }
            }
        }
        Circuit {
            roles,
            gates: self.gates,
            tiles: self.tiles,
        }
    }
}

fn bit(n: u64, k: u32) -> bool {
    k < 64 && (n >> k) & 1 == 1
}

/// Long multiplication: AND partial products, then per-column ripple chains
/// whose final sums are pinned to the bits of `n`.
pub(crate) fn mc_circuit(n: u64, l_p: u32, l_q: u32) -> Circuit {
    let mut b = CircuitBuilder::new();
    let p = b.factor_bits(l_p, VariableRole::FactorP);
    let q = b.factor_bits(l_q, VariableRole::FactorQ);
    let width = (l_p + l_q) as usize;
    let mut columns: Vec<Vec<Signal>> = vec![Vec::new(); width];
    for (i, &qi) in q.iter().enumerate() {
        for (j, &pj) in p.iter().enumerate() {
            let pp = b.and(qi, pj);
            columns[i + j].push(pp);
        }
    }
    let mut c = 0usize;
    let mut pending: Vec<Signal> = Vec::new();
    while c < width || !pending.is_empty() {
        let mut sig: Vec<Signal> = columns.get(c).cloned().unwrap_or_default();
        sig.append(&mut pending);
        sig.retain(|s| *s != Signal::zero());
        let target = bit(n, c as u32);
        match sig.len() {
            0 => b.pin(Signal::zero(), target),
            1 => b.pin(sig[0], target),
            len => {
                let mut acc = sig[0];
                let mut i = 1;
                while i < len {
                    let take = if len - i >= 2 { 2 } else { 1 };
                    let last = i + take == len;
                    let mut inputs = vec![acc];
                    inputs.extend_from_slice(&sig[i..i + take]);
                    let (s, carry) = b.adder(&inputs, last.then_some(target));
                    if carry != Signal::zero() {
                        pending.push(carry);
                    }
                    acc = s;
                    i += take;
                }
            }
        }
        c += 1;
    }
    b.finish()
}

/// Rows `i = 1..l_q` of controlled full adders adding `q_i * p` into the
/// running sum; column 0 of each row and the whole last row are pinned.
pub(crate) fn cfa_circuit(n: u64, l_p: u32, l_q: u32) -> Circuit {
    let mut b = CircuitBuilder::new();
    let p = b.factor_bits(l_p, VariableRole::FactorP);
    let q = b.factor_bits(l_q, VariableRole::FactorQ);
    let width = (l_p + l_q) as usize;
    let mut s: Vec<Signal> = vec![Signal::zero(); width];
    s[..l_p as usize].copy_from_slice(&p);
    for i in 1..l_q as usize {
        let last_row = i == l_q as usize - 1;
        let mut carry = Signal::zero();
        for j in 0..l_p as usize {
            let first = b.gate_count();
            let x = b.and(q[i], p[j]);
            let pinned = if j == 0 || last_row {
                Some(bit(n, (i + j) as u32))
            } else {
                None
            };
            let (s_out, c_out) = b.adder(&[x, s[i + j], carry], pinned);
            s[i + j] = s_out;
            carry = c_out;
            b.record_tile(i as u32, j as u32, first);
        }
        if last_row {
            b.pin(carry, bit(n, (i + l_p as usize) as u32));
        } else {
            s[i + l_p as usize] = carry;
        }
    }
    if n >> width.min(63) != 0 {
        b.pin(Signal::zero(), true);
    }
    b.finish()
}

pub(crate) fn tile_grid(circuit: &Circuit, l_p: u32, l_q: u32) -> TileGrid {
    let find = |role: VariableRole| circuit.roles.iter().position(|&r| r == role);
    let tiles = circuit
        .tiles
        .iter()
        .map(|(row, col, gates)| {
            let mut poly = Poly::default();
            let mut vars = BTreeSet::new();
            for &g in gates {
                circuit.gates[g].add_penalty(&mut poly);
                vars.extend(circuit.gates[g].vars());
            }
            TileSpec {
                row: *row,
                col: *col,
                gates: gates.clone(),
                vars: vars.into_iter().collect(),
                couplers: poly
                    .quadratic
                    .iter()
                    .filter(|(_, &c)| c != 0)
                    .map(|(&k, _)| k)
                    .collect(),
                p: find(VariableRole::FactorP(*col)),
                q: find(VariableRole::FactorQ(*row)),
            }
        })
        .collect();
    TileGrid { l_p, l_q, tiles }
}

/// Sum of all gate penalties as a model polynomial.
pub(crate) fn circuit_poly(circuit: &Circuit) -> Result<Poly> {
    let mut poly = Poly::default();
    for g in &circuit.gates {
        g.add_penalty(&mut poly);
    }
    Ok(poly)
}
