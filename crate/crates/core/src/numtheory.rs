//! Exact 64-bit number theory: gcd, modular exponentiation, continued
//! fractions, deterministic primality, semiprime sampling and an order
//! oracle that uses knowledge of the prime factors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported modulus (exclusive): products of residues are formed in
/// 128-bit intermediates.
pub const MAX_MODULUS: u64 = 1 << 62;

/// An odd composite `n = p * q` together with its prime factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Semiprime {
    pub n: u64,
    pub p: u64,
    pub q: u64,
    pub bit_length_n: u32,
    pub l_p: u32,
    pub l_q: u32,
}

impl Semiprime {
    /// Builds a semiprime from two odd primes, checking every invariant.
    pub fn from_factors(p: u64, q: u64) -> Result<Self> {
        if p <= 2 || q <= 2 || !is_prime(p) || !is_prime(q) {
            return Err(Error::InvalidInput(format!(
                "{p} and {q} must both be odd primes"
            )));
        }
        let n = (p as u128) * (q as u128);
        if n >= MAX_MODULUS as u128 {
            return Err(Error::InvalidInput(format!(
                "{p} * {q} exceeds the supported range 2^62"
            )));
        }
        let n = n as u64;
        Ok(Semiprime {
            n,
            p,
            q,
            bit_length_n: bit_length(n),
            l_p: bit_length(p),
            l_q: bit_length(q),
        })
    }

    /// Carmichael function of `n`.
    pub fn carmichael(&self) -> u64 {
        if self.p == self.q {
            self.p * (self.p - 1)
        } else {
            lcm(self.p - 1, self.q - 1)
        }
    }

    pub fn smaller_factor(&self) -> u64 {
        self.p.min(self.q)
    }
}

/// A continued-fraction convergent `numerator / denominator`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergent {
    pub numerator: u128,
    pub denominator: u128,
}

/// Number of bits needed to write `n` (0 for `n = 0`).
pub fn bit_length(n: u64) -> u32 {
    64 - n.leading_zeros()
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

#[inline]
pub fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

/// `a^e mod n` by square-and-multiply.
pub fn mod_pow(a: u64, mut e: u64, n: u64) -> u64 {
    assert!(n >= 1, "modulus must be positive");
    if n == 1 {
        return 0;
    }
    let mut base = a % n;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, n);
        }
        base = mul_mod(base, base, n);
        e >>= 1;
    }
    acc
}

/// Modular inverse of `a` modulo `n`, if it exists.
pub fn mod_inverse(a: u64, n: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % n as i128, n as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(n as i128) as u64)
}

/// Full convergent sequence of `j / 2^t`.
///
/// The last convergent equals the fraction in lowest terms.
pub fn convergents(j: u128, t: u32) -> Vec<Convergent> {
    assert!((1..=127).contains(&t), "t must lie in 1..=127");
    let denom = 1u128 << t;
    assert!(j < denom, "j must be below 2^t");
    let (mut num, mut den) = (j, denom);
    // (h_{-1}, k_{-1}) = (1, 0), (h_{-2}, k_{-2}) = (0, 1)
    let (mut h_prev, mut h_prev2) = (1u128, 0u128);
    let (mut k_prev, mut k_prev2) = (0u128, 1u128);
    let mut out = Vec::new();
    loop {
        let a = num / den;
        let h = a * h_prev + h_prev2;
        let k = a * k_prev + k_prev2;
        out.push(Convergent {
            numerator: h,
            denominator: k,
        });
        let rem = num % den;
        if rem == 0 {
            break;
        }
        (num, den) = (den, rem);
        (h_prev2, h_prev) = (h_prev, h);
        (k_prev2, k_prev) = (k_prev, k);
    }
    out
}

/// Returns `true` if `gcd(numerator, denominator) == 1`.
pub fn is_reduced(c: &Convergent) -> bool {
    gcd_u128(c.numerator, c.denominator) == 1
}

const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller-Rabin; exact for every `u64` input.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &b in &MR_BASES {
        if n == b {
            return true;
        }
        if n % b == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &b in &MR_BASES {
        let mut x = mod_pow(b, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Uniform odd prime with exactly `bits` bits.
pub fn random_prime<R: Rng + ?Sized>(bits: u32, rng: &mut R) -> Result<u64> {
    if !(3..=61).contains(&bits) {
        return Err(Error::InvalidInput(format!(
            "prime bit length {bits} outside 3..=61"
        )));
    }
    let low = 1u64 << (bits - 1);
    let high = (1u64 << bits) - 1;
    loop {
        let candidate = rng.random_range(low..=high) | 1;
        if is_prime(candidate) {
            return Ok(candidate);
        }
    }
}

/// Random semiprime from two independently drawn primes of the given bit
/// lengths. `p == q` is allowed.
pub fn random_semiprime_with<R: Rng + ?Sized>(
    l_p: u32,
    l_q: u32,
    rng: &mut R,
) -> Result<Semiprime> {
    if l_p < 3 || l_q < 3 {
        return Err(Error::InvalidInput(
            "factor bit lengths must be at least 3".into(),
        ));
    }
    if l_p + l_q > 62 {
        return Err(Error::InvalidInput(format!(
            "l_p + l_q = {} exceeds 62 bits",
            l_p + l_q
        )));
    }
    let p = random_prime(l_p, rng)?;
    let q = random_prime(l_q, rng)?;
    Semiprime::from_factors(p, q)
}

pub fn random_semiprime(l_p: u32, l_q: u32, seed: u64) -> Result<Semiprime> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_semiprime_with(l_p, l_q, &mut rng)
}

/// Prime factorisation by trial division, as `(prime, exponent)` pairs.
pub fn factorize_small(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Smallest `r >= 1` with `a^r = 1 (mod n)`, using the known factors of `n`.
pub fn multiplicative_order(a: u64, s: &Semiprime) -> Result<u64> {
    let n = s.n;
    let a = a % n;
    if gcd(a, n) != 1 {
        return Err(Error::NotCoprime { a, n });
    }
    let mut r = s.carmichael();
    for (prime, _) in factorize_small(r) {
        while r % prime == 0 && mod_pow(a, r / prime, n) == 1 {
            r /= prime;
        }
    }
    Ok(r)
}
