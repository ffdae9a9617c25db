use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::model::VariableRole;

/// Bit encoding `p = 1 p_{l_p*} ... p_1 1`, and likewise for `q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorEncoding {
    l_p: u32,
    l_q: u32,
    p_vars: Vec<usize>,
    q_vars: Vec<usize>,
}

impl FactorEncoding {
    pub fn new(l_p: u32, l_q: u32, p_vars: Vec<usize>, q_vars: Vec<usize>) -> Result<Self> {
        if l_p < 3 || l_q < 3 || l_p > 62 || l_q > 62 {
            return Err(Error::InvalidInput(format!(
                "factor lengths ({l_p}, {l_q}) outside 3..=62"
            )));
        }
        if p_vars.len() != (l_p - 2) as usize || q_vars.len() != (l_q - 2) as usize {
            return Err(Error::InvalidInput(
                "index map length does not match factor length".into(),
            ));
        }
        Ok(FactorEncoding {
            l_p,
            l_q,
            p_vars,
            q_vars,
        })
    }

    /// Factor bits occupy variables `0..l`, `p` first.
    pub fn standard(l_p: u32, l_q: u32) -> Result<Self> {
        let lps = l_p.saturating_sub(2) as usize;
        let lqs = l_q.saturating_sub(2) as usize;
        Self::new(l_p, l_q, (0..lps).collect(), (lps..lps + lqs).collect())
    }

    /// Recovers the encoding from per-variable roles.
    pub fn from_roles(roles: &[VariableRole]) -> Result<Self> {
        let mut p = Vec::new();
        let mut q = Vec::new();
        for (v, r) in roles.iter().enumerate() {
            match *r {
                VariableRole::FactorP(i) => p.push((i, v)),
                VariableRole::FactorQ(i) => q.push((i, v)),
                _ => {}
            }
        }
        p.sort_unstable();
        q.sort_unstable();
        let contiguous = |xs: &[(u32, usize)]| {
            xs.iter()
                .enumerate()
                .all(|(k, &(i, _))| i as usize == k + 1)
        };
        if !contiguous(&p) || !contiguous(&q) {
            return Err(Error::InvalidInput(
                "factor-bit roles must be p1..pk and q1..qm".into(),
            ));
        }
        Self::new(
            p.len() as u32 + 2,
            q.len() as u32 + 2,
            p.into_iter().map(|(_, v)| v).collect(),
            q.into_iter().map(|(_, v)| v).collect(),
        )
    }

    pub fn l_p(&self) -> u32 {
        self.l_p
    }

    pub fn l_q(&self) -> u32 {
        self.l_q
    }

    pub fn l_p_star(&self) -> usize {
        self.p_vars.len()
    }

    pub fn l_q_star(&self) -> usize {
        self.q_vars.len()
    }

    /// Number of unknown bits.
    pub fn l(&self) -> usize {
        self.p_vars.len() + self.q_vars.len()
    }

    /// Variable index of `p_i`, `1 <= i <= l_p*`.
    pub fn p_var(&self, i: usize) -> usize {
        self.p_vars[i - 1]
    }

    pub fn q_var(&self, i: usize) -> usize {
        self.q_vars[i - 1]
    }

    pub fn p_vars(&self) -> &[usize] {
        &self.p_vars
    }

    pub fn q_vars(&self) -> &[usize] {
        &self.q_vars
    }

    /// Whether `(p, q)` is representable: exact bit lengths and odd.
    pub fn fits(&self, p: u64, q: u64) -> bool {
        let ok = |x: u64, l: u32| x & 1 == 1 && 64 - x.leading_zeros() == l;
        ok(p, self.l_p) && ok(q, self.l_q)
    }

    /// Writes the unknown bits of `p` and `q` into `x`.
    pub fn write_factors(&self, p: u64, q: u64, x: &mut [u8]) -> Result<()> {
        if !self.fits(p, q) {
            return Err(Error::InvalidInput(format!(
                "({p}, {q}) does not fit the ({}, {})-bit encoding",
                self.l_p, self.l_q
            )));
        }
        for (k, &v) in self.p_vars.iter().enumerate() {
            x[v] = ((p >> (k + 1)) & 1) as u8;
        }
        for (k, &v) in self.q_vars.iter().enumerate() {
            x[v] = ((q >> (k + 1)) & 1) as u8;
        }
        Ok(())
    }

    pub fn decode(&self, x: &[u8]) -> (u64, u64) {
        let one = |bits: &[usize], l: u32| {
            let mut v = (1u64 << (l - 1)) | 1;
            for (k, &var) in bits.iter().enumerate() {
                if x[var] != 0 {
                    v |= 1 << (k + 1);
                }
            }
            v
        };
        (one(&self.p_vars, self.l_p), one(&self.q_vars, self.l_q))
    }
}

/// Reads the factor candidates out of a sample; ancillas are ignored.
pub fn decode_sample(assignment: &[u8], encoding: &FactorEncoding) -> (u64, u64) {
    encoding.decode(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_examples() {
        let e = FactorEncoding::standard(3, 3).unwrap();
        assert_eq!(e.decode(&[0, 0]), (5, 5));
        let e = FactorEncoding::standard(4, 3).unwrap();
        assert_eq!(e.decode(&[1, 1, 0]).0, 15);
    }

    #[test]
    fn bits_of_1021() {
        let e = FactorEncoding::standard(10, 10).unwrap();
        let mut x = vec![0u8; e.l()];
        e.write_factors(1021, 1021, &mut x).unwrap();
        assert_eq!(&x[..8], &[0, 1, 1, 1, 1, 1, 1, 1]);
        assert_eq!(e.decode(&x), (1021, 1021));
    }

    #[test]
    fn rejects_bad_lengths() {
        let e = FactorEncoding::standard(4, 4).unwrap();
        let mut x = vec![0u8; 4];
        assert!(e.write_factors(7, 9, &mut x).is_err());
        assert!(e.write_factors(14, 9, &mut x).is_err());
        assert!(FactorEncoding::standard(2, 4).is_err());
    }
}
