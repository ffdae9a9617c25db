//! Statevector simulation of the iterative (one control qubit) Shor circuit.
//!
//! The register holds `L` work qubits and one control qubit. Amplitude
//! `control * 2^L + y` belongs to basis state `|control>|y>`. Every iteration
//! prepares the control in `|+>`, applies the controlled modular multiplication,
//! applies the measurement-conditioned feedback rotations, rotates back with a
//! Hadamard, measures the control and resets it.
//!
//! Bit order: bit `m` of the returned record is measured in iteration `m` and
//! has weight `2^m` in `j`. Iteration `m` multiplies by `a^(2^(t-1-m))`, so the
//! least significant bit of `j` is measured first.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::{self, bit_length, gcd, mod_inverse, mul_mod, Semiprime};

pub const DEFAULT_QUBIT_CAP: u32 = 26;

/// Above this many bytes the per-iteration gather tables are not cached and
/// source indices are recomputed with a modular multiplication per amplitude.
const GATHER_TABLE_BUDGET: usize = 256 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    pub semiprime: Semiprime,
    pub a: u64,
    pub t: u32,
    /// Noise magnitude of the rotation gates.
    pub delta: f64,
    pub seed: u64,
}

impl CircuitParams {
    /// Parameters with the default `t = 2L` and no noise.
    pub fn new(semiprime: Semiprime, a: u64, seed: u64) -> Self {
        CircuitParams {
            semiprime,
            a,
            t: 2 * semiprime.bit_length_n,
            delta: 0.0,
            seed,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_t(mut self, t: u32) -> Self {
        self.t = t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.semiprime.n;
        if self.a < 2 || self.a >= n {
            return Err(Error::InvalidInput(format!(
                "base a = {} outside [2, {n})",
                self.a
            )));
        }
        if gcd(self.a, n) != 1 {
            return Err(Error::NotCoprime { a: self.a, n });
        }
        if self.t == 0 || self.t > 120 {
            return Err(Error::InvalidInput(format!(
                "t = {} outside 1..=120",
                self.t
            )));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "delta = {} must be >= 0",
                self.delta
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    /// Measured bits in measurement order; bit `m` has weight `2^m`.
    pub bits: Vec<u8>,
    pub j: u128,
    pub shot_seed: u64,
}

impl MeasurementRecord {
    pub fn from_bits(bits: Vec<u8>, shot_seed: u64) -> Self {
        let j = bits
            .iter()
            .enumerate()
            .fold(0u128, |acc, (m, &b)| acc | ((b as u128) << m));
        MeasurementRecord { bits, j, shot_seed }
    }

    pub fn t(&self) -> u32 {
        self.bits.len() as u32
    }
}

/// Bytes needed for a dense double-precision statevector of `L + 1` qubits.
pub fn required_memory_bytes(work_qubits: u32) -> u128 {
    16u128 << (work_qubits + 1)
}

/// Phase of a rotation gate `R_k` with Gaussian over-rotation of relative
/// magnitude `delta`. One standard-normal draw per call.
pub fn noisy_rotation_phase<R: Rng + ?Sized>(k: u32, delta: f64, rng: &mut R) -> f64 {
    assert!(k >= 1, "rotation index starts at 1");
    let r: f64 = rng.sample(StandardNormal);
    2.0 * PI * (1.0 + delta * r) / 2f64.powi(k as i32)
}

/// Dense `2^(L+1)` amplitude vector with the control qubit as the top bit.
#[derive(Clone, Debug)]
pub struct StateVector {
    work_qubits: u32,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0>|y>` on `work_qubits` work qubits.
    pub fn basis(work_qubits: u32, y: u64) -> Self {
        let len = 1usize << (work_qubits + 1);
        assert!((y as usize) < len / 2, "work value out of range");
        let mut amps = vec![Complex64::new(0.0, 0.0); len];
        amps[y as usize] = Complex64::new(1.0, 0.0);
        StateVector { work_qubits, amps }
    }

    pub fn work_qubits(&self) -> u32 {
        self.work_qubits
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn memory_bytes(&self) -> usize {
        self.amps.len() * std::mem::size_of::<Complex64>()
    }

    pub fn amplitude(&self, control: u8, y: u64) -> Complex64 {
        self.amps[self.index(control, y)]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    #[inline]
    fn index(&self, control: u8, y: u64) -> usize {
        ((control as usize) << self.work_qubits) | y as usize
    }

    fn halves(&mut self) -> (&mut [Complex64], &mut [Complex64]) {
        let half = 1usize << self.work_qubits;
        self.amps.split_at_mut(half)
    }

    /// Resets to `|0>|y>`, clearing only the listed work values.
    fn reset_to(&mut self, support: &[u64], y: u64) {
        let (lo, hi) = self.halves();
        for &s in support {
            lo[s as usize] = Complex64::new(0.0, 0.0);
            hi[s as usize] = Complex64::new(0.0, 0.0);
        }
        lo[y as usize] = Complex64::new(1.0, 0.0);
    }

    // The gate methods below act only on the listed work values. `support`
    // must contain every populated work value and be closed under the
    // multiplications applied.

    pub fn hadamard_control(&mut self, support: &[u64]) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (lo, hi) = self.halves();
        for &y in support {
            let (a0, a1) = (lo[y as usize], hi[y as usize]);
            lo[y as usize] = (a0 + a1) * s;
            hi[y as usize] = (a0 - a1) * s;
        }
    }

    /// `|1>|y> -> |1>|c*y mod n>` for `y < n`; the control-0 half is untouched.
    pub fn controlled_mul_mod(
        &mut self,
        c: u64,
        n: u64,
        support: &[u64],
        scratch: &mut Vec<Complex64>,
    ) {
        let c_inv = mod_inverse(c, n).expect("multiplier must be a unit modulo n");
        let (_, hi) = self.halves();
        scratch.clear();
        scratch.extend(support.iter().map(|&y| hi[mul_mod(c_inv, y, n) as usize]));
        for (&y, &v) in support.iter().zip(scratch.iter()) {
            hi[y as usize] = v;
        }
    }

    /// `diag(1, e^{i theta})` on the control.
    pub fn phase_control(&mut self, theta: f64, support: &[u64]) {
        let ph = Complex64::from_polar(1.0, theta);
        let (_, hi) = self.halves();
        for &y in support {
            hi[y as usize] *= ph;
        }
    }

    /// Projective measurement of the control. `u` is a uniform draw in
    /// `[0, 1)`; outcome 1 occurs when `u < P(1)`.
    pub fn measure_control(&mut self, u: f64, support: &[u64]) -> u8 {
        let (lo, hi) = self.halves();
        let p1: f64 = support.iter().map(|&y| hi[y as usize].norm_sqr()).sum();
        let bit = u8::from(u < p1);
        let (keep, drop, p) = if bit == 1 {
            (hi, lo, p1)
        } else {
            (lo, hi, 1.0 - p1)
        };
        let scale = 1.0 / p.sqrt();
        for &y in support {
            keep[y as usize] *= scale;
            drop[y as usize] = Complex64::new(0.0, 0.0);
        }
        bit
    }

    /// Flips a measured control back to `|0>`.
    pub fn reset_control(&mut self, measured: u8, support: &[u64]) {
        if measured == 1 {
            let (lo, hi) = self.halves();
            for &y in support {
                lo[y as usize] = hi[y as usize];
                hi[y as usize] = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// Precomputed structure shared by all shots of one `(N, a, t)` problem.
#[derive(Debug)]
struct Plan {
    n: u64,
    t: u32,
    /// Sorted orbit `{a^x mod N}`: the only work values that ever carry
    /// amplitude.
    support: Vec<u64>,
    /// `a^(2^(t-1-k))` for iteration `k`.
    multipliers: Vec<u64>,
    /// Per iteration, the source index `c^-1 * y mod N` for every support
    /// entry; `None` when the multiplier is 1 or the tables are too large.
    gather: Vec<Option<Vec<u32>>>,
    inverses: Vec<u64>,
}

/// Reusable simulator for one factoring problem.
#[derive(Debug)]
pub struct ShorSimulator {
    plan: Plan,
    state: StateVector,
    scratch: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub qubit_cap: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }
}

impl ShorSimulator {
    pub fn new(semiprime: &Semiprime, a: u64, t: u32, config: SimConfig) -> Result<Self> {
        let n = semiprime.n;
        CircuitParams {
            semiprime: *semiprime,
            a,
            t,
            delta: 0.0,
            seed: 0,
        }
        .validate()?;
        let work_qubits = bit_length(n);
        if work_qubits + 1 > config.qubit_cap {
            return Err(Error::QubitCapExceeded {
                required: work_qubits + 1,
                cap: config.qubit_cap,
            });
        }

        let mut support = vec![1u64];
        let mut y = a % n;
        while y != 1 {
            support.push(y);
            y = mul_mod(y, a, n);
        }
        support.sort_unstable();

        let mut multipliers = vec![0u64; t as usize];
        let mut c = a % n;
        // multipliers[t-1] = a, multipliers[t-2] = a^2, ...
        for k in (0..t as usize).rev() {
            multipliers[k] = c;
            c = mul_mod(c, c, n);
        }
        let inverses: Vec<u64> = multipliers
            .iter()
            .map(|&c| mod_inverse(c, n).expect("a is a unit"))
            .collect();

        let table_bytes = support.len() * 4 * t as usize;
        let gather = multipliers
            .iter()
            .zip(&inverses)
            .map(|(&c, &c_inv)| {
                (c != 1 && table_bytes <= GATHER_TABLE_BUDGET).then(|| {
                    support
                        .iter()
                        .map(|&y| mul_mod(c_inv, y, n) as u32)
                        .collect()
                })
            })
            .collect();

        Ok(ShorSimulator {
            plan: Plan {
                n,
                t,
                support,
                multipliers,
                gather,
                inverses,
            },
            state: StateVector::basis(work_qubits, 1),
            scratch: Vec::new(),
        })
    }

    /// Order of `a`, read off the size of the populated orbit.
    pub fn orbit_size(&self) -> usize {
        self.plan.support.len()
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    /// Runs one shot with the fused per-iteration update.
    pub fn run(&mut self, delta: f64, shot_seed: u64) -> MeasurementRecord {
        let plan = &self.plan;
        self.state.reset_to(&plan.support, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(shot_seed);
        let mut bits = Vec::with_capacity(plan.t as usize);
        for k in 0..plan.t as usize {
            let theta = feedback_phase(&bits, delta, &mut rng);
            let u: f64 = rng.random();
            let bit = fused_iteration(&mut self.state, plan, k, theta, u);
            bits.push(bit);
        }
        MeasurementRecord::from_bits(bits, shot_seed)
    }

    /// Runs one shot gate by gate. Slower; the fused path is checked
    /// against it.
    pub fn run_gatewise(&mut self, delta: f64, shot_seed: u64) -> MeasurementRecord {
        self.run_gatewise_observed(delta, shot_seed, |_| {})
    }

    /// Gate-by-gate shot that hands the state to `observe` after every gate.
    pub fn run_gatewise_observed(
        &mut self,
        delta: f64,
        shot_seed: u64,
        mut observe: impl FnMut(&StateVector),
    ) -> MeasurementRecord {
        let plan = &self.plan;
        let support = &plan.support;
        self.state.reset_to(support, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(shot_seed);
        let mut bits = Vec::with_capacity(plan.t as usize);
        for k in 0..plan.t as usize {
            let theta = feedback_phase(&bits, delta, &mut rng);
            let u: f64 = rng.random();
            self.state.hadamard_control(support);
            observe(&self.state);
            self.state
                .controlled_mul_mod(plan.multipliers[k], plan.n, support, &mut self.scratch);
            observe(&self.state);
            self.state.phase_control(theta, support);
            observe(&self.state);
            self.state.hadamard_control(support);
            observe(&self.state);
            let bit = self.state.measure_control(u, support);
            observe(&self.state);
            self.state.reset_control(bit, support);
            observe(&self.state);
            bits.push(bit);
        }
        MeasurementRecord::from_bits(bits, shot_seed)
    }
}

/// Sum of the inverse feedback rotations for iteration `k = bits.len()`.
///
/// Each earlier bit `m` that came out 1 contributes `R_{k-m+1}^dagger` with a
/// fresh noise draw; zero bits apply no gate and draw nothing.
fn feedback_phase<R: Rng + ?Sized>(bits: &[u8], delta: f64, rng: &mut R) -> f64 {
    let k = bits.len() as u32;
    let mut theta = 0.0;
    for (m, &b) in bits.iter().enumerate() {
        if b == 1 {
            theta -= noisy_rotation_phase(k - m as u32 + 1, delta, rng);
        }
    }
    theta
}

/// H, controlled multiplication, phase, H, measurement and reset in two
/// passes over the support. Requires the control-1 half to be empty.
fn fused_iteration(state: &mut StateVector, plan: &Plan, k: usize, theta: f64, u: f64) -> u8 {
    let ph = Complex64::from_polar(1.0, theta);
    let (lo, hi) = state.halves();
    let support = &plan.support;
    let mut p1 = 0.0;
    match &plan.gather[k] {
        Some(src) => {
            for (&y, &s) in support.iter().zip(src.iter()) {
                let b = lo[s as usize] * ph;
                hi[y as usize] = b;
                p1 += (lo[y as usize] - b).norm_sqr();
            }
        }
        None => {
            let (c_inv, n) = (plan.inverses[k], plan.n);
            for &y in support {
                let src = if c_inv == 1 { y } else { mul_mod(c_inv, y, n) };
                let b = lo[src as usize] * ph;
                hi[y as usize] = b;
                p1 += (lo[y as usize] - b).norm_sqr();
            }
        }
    }
    p1 *= 0.25;
    let bit = u8::from(u < p1);
    let p = if bit == 1 { p1 } else { 1.0 - p1 };
    let scale = 0.5 / p.sqrt();
    let zero = Complex64::new(0.0, 0.0);
    for &y in support {
        let (a, b) = (lo[y as usize], hi[y as usize]);
        lo[y as usize] = if bit == 1 {
            (a - b) * scale
        } else {
            (a + b) * scale
        };
        hi[y as usize] = zero;
    }
    bit
}

/// One shot for the given parameters.
pub fn run_shot(params: &CircuitParams, config: SimConfig) -> Result<MeasurementRecord> {
    params.validate()?;
    let mut sim = ShorSimulator::new(&params.semiprime, params.a, params.t, config)?;
    Ok(sim.run(params.delta, params.seed))
}

pub const EXACT_MAX_T: u32 = 24;
pub const EXACT_MAX_ORDER: u64 = 1 << 16;

/// Noiseless outcome law of the order-finding circuit:
/// `P(j) = sum_{x0 < r} |2^-t sum_{m: x0 + m r < 2^t} e^{2 pi i j (x0 + m r) / 2^t}|^2`,
/// evaluated with the closed form of the inner geometric series.
pub fn exact_distribution(semiprime: &Semiprime, a: u64, t: u32) -> Result<Vec<f64>> {
    if t == 0 || t > EXACT_MAX_T {
        return Err(Error::CostCapExceeded(format!(
            "t = {t} exceeds {EXACT_MAX_T}"
        )));
    }
    let r = numtheory::multiplicative_order(a, semiprime)?;
    if r > EXACT_MAX_ORDER {
        return Err(Error::CostCapExceeded(format!(
            "order {r} exceeds {EXACT_MAX_ORDER}"
        )));
    }
    let size = 1u64 << t;
    let (q, rem) = (size / r, size % r);
    // rem residues see q + 1 terms, the remaining r - rem see q terms.
    let (count_long, count_short) = (rem as f64, (r - rem) as f64);
    let norm = 1.0 / (size as f64 * size as f64);
    let out = (0..size)
        .map(|j| {
            let phase_num = mul_mod(j, r, size);
            let geom = |terms: u64| -> f64 {
                if terms == 0 {
                    0.0
                } else if phase_num == 0 {
                    (terms * terms) as f64
                } else {
                    let phi = phase_num as f64 / size as f64;
                    let num = (PI * terms as f64 * phi).sin();
                    let den = (PI * phi).sin();
                    (num * num) / (den * den)
                }
            };
            norm * (count_long * geom(q + 1) + count_short * geom(q))
        })
        .collect();
    Ok(out)
}

/// Total variation distance between two distributions on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
