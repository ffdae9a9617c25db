use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a binary variable stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VariableRole {
    /// Unknown bit `p_i` of the first factor, `1 <= i <= l_p - 2`.
    FactorP(u32),
    FactorQ(u32),
    /// Product ancilla standing in for `p_i * q_k`.
    Reduction(u32, u32),
    And,
    Sum,
    Carry,
}

impl VariableRole {
    pub fn is_factor_bit(&self) -> bool {
        matches!(self, VariableRole::FactorP(_) | VariableRole::FactorQ(_))
    }
}

impl fmt::Display for VariableRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariableRole::FactorP(i) => write!(f, "p{i}"),
            VariableRole::FactorQ(i) => write!(f, "q{i}"),
            VariableRole::Reduction(i, k) => write!(f, "red{i}_{k}"),
            VariableRole::And => f.write_str("and"),
            VariableRole::Sum => f.write_str("sum"),
            VariableRole::Carry => f.write_str("carry"),
        }
    }
}

impl FromStr for VariableRole {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let bad = || format!("unknown role {s:?}");
        match s {
            "and" => return Ok(VariableRole::And),
            "sum" => return Ok(VariableRole::Sum),
            "carry" => return Ok(VariableRole::Carry),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("red") {
            let (i, k) = rest.split_once('_').ok_or_else(bad)?;
            return Ok(VariableRole::Reduction(
                i.parse().map_err(|_| bad())?,
                k.parse().map_err(|_| bad())?,
            ));
        }
        if let Some(i) = s.strip_prefix('p') {
            return i.parse().map(VariableRole::FactorP).map_err(|_| bad());
        }
        if let Some(i) = s.strip_prefix('q') {
            return i.parse().map(VariableRole::FactorQ).map_err(|_| bad());
        }
        Err(bad())
    }
}

/// `E(x) = offset + sum_i a_i x_i + sum_{i<j} b_ij x_i x_j` with integer
/// coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuboModel {
    linear: Vec<i64>,
    quadratic: BTreeMap<(usize, usize), i64>,
    offset: i64,
    roles: Vec<VariableRole>,
}

impl QuboModel {
    /// Builds a model, merging duplicate terms, folding `i == j` into the
    /// linear part and dropping zero couplers.
    pub fn new(
        roles: Vec<VariableRole>,
        offset: i64,
        terms: impl IntoIterator<Item = (usize, usize, i64)>,
    ) -> Result<Self> {
        let n = roles.len();
        let mut linear = vec![0i64; n];
        let mut quadratic: BTreeMap<(usize, usize), i64> = BTreeMap::new();
        for (i, j, c) in terms {
            if i >= n || j >= n {
                return Err(Error::InvalidInput(format!(
                    "term ({i}, {j}) outside {n} variables"
                )));
            }
            if i == j {
                linear[i] = linear[i]
                    .checked_add(c)
                    .ok_or(Error::CoefficientOverflow("model"))?;
            } else {
                let key = (i.min(j), i.max(j));
                let e = quadratic.entry(key).or_insert(0);
                *e = e
                    .checked_add(c)
                    .ok_or(Error::CoefficientOverflow("model"))?;
            }
        }
        quadratic.retain(|_, c| *c != 0);
        Ok(QuboModel {
            linear,
            quadratic,
            offset,
            roles,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn linear(&self) -> &[i64] {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), i64> {
        &self.quadratic
    }

    pub fn coupler(&self, i: usize, j: usize) -> i64 {
        self.quadratic
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or(0)
    }

    pub fn roles(&self) -> &[VariableRole] {
        &self.roles
    }

    pub fn role_count(&self, pred: impl Fn(&VariableRole) -> bool) -> usize {
        self.roles.iter().filter(|r| pred(r)).count()
    }

    /// Exact energy of a 0/1 assignment.
    pub fn evaluate(&self, x: &[u8]) -> i128 {
        assert_eq!(x.len(), self.num_vars(), "assignment length mismatch");
        let mut e = self.offset as i128;
        for (i, &a) in self.linear.iter().enumerate() {
            if x[i] != 0 {
                e += a as i128;
            }
        }
        for (&(i, j), &b) in &self.quadratic {
            if x[i] != 0 && x[j] != 0 {
                e += b as i128;
            }
        }
        e
    }

    /// Per-variable neighbour lists `(j, b_ij)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, i64)>> {
        let mut adj = vec![Vec::new(); self.num_vars()];
        for (&(i, j), &b) in &self.quadratic {
            adj[i].push((j, b));
            adj[j].push((i, b));
        }
        adj
    }

    pub fn max_abs_coefficient(&self) -> i64 {
        self.linear
            .iter()
            .chain(self.quadratic.values())
            .map(|c| c.saturating_abs())
            .max()
            .unwrap_or(0)
    }

    /// `|a_i| + sum_j |b_ij|` for every variable.
    pub fn incident_abs_sums(&self) -> Vec<i128> {
        let mut out: Vec<i128> = self.linear.iter().map(|&a| (a as i128).abs()).collect();
        for (&(i, j), &b) in &self.quadratic {
            out[i] += (b as i128).abs();
            out[j] += (b as i128).abs();
        }
        out
    }

    /// Largest absolute coefficient touching each variable.
    pub fn incident_abs_max(&self) -> Vec<i64> {
        let mut out: Vec<i64> = self.linear.iter().map(|a| a.saturating_abs()).collect();
        for (&(i, j), &b) in &self.quadratic {
            out[i] = out[i].max(b.saturating_abs());
            out[j] = out[j].max(b.saturating_abs());
        }
        out
    }

    /// Serialises to the line-oriented text format:
    ///
    /// ```text
    /// # qubo n=<n> offset=<offset>
    /// # var <index> <role>
    /// <i> <j> <coefficient>
    /// ```
    ///
    /// Term lines have `i <= j` (`i == j` is a linear term), appear in
    /// ascending `(i, j)` order and omit zero coefficients.
    pub fn to_text(&self) -> String {
        let mut out = format!("# qubo n={} offset={}\n", self.num_vars(), self.offset);
        for (i, role) in self.roles.iter().enumerate() {
            out.push_str(&format!("# var {i} {role}\n"));
        }
        let mut terms: Vec<(usize, usize, i64)> = self
            .linear
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0)
            .map(|(i, &a)| (i, i, a))
            .chain(self.quadratic.iter().map(|(&(i, j), &b)| (i, j, b)))
            .collect();
        terms.sort_unstable();
        for (i, j, c) in terms {
            out.push_str(&format!("{i} {j} {c}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            what: "qubo",
            line,
            msg,
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty input".into()))?;
        let rest = header
            .strip_prefix("# qubo ")
            .ok_or_else(|| err(1, "missing '# qubo' header".into()))?;
        let mut n = None;
        let mut offset = None;
        for field in rest.split_whitespace() {
            if let Some(v) = field.strip_prefix("n=") {
                n = Some(v.parse::<usize>().map_err(|e| err(1, e.to_string()))?);
            } else if let Some(v) = field.strip_prefix("offset=") {
                offset = Some(v.parse::<i64>().map_err(|e| err(1, e.to_string()))?);
            } else {
                return Err(err(1, format!("unexpected header field {field:?}")));
            }
        }
        let n = n.ok_or_else(|| err(1, "missing n=".into()))?;
        let offset = offset.ok_or_else(|| err(1, "missing offset=".into()))?;
        let mut roles: Vec<Option<VariableRole>> = vec![None; n];
        let mut terms = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# var ") {
                let mut parts = rest.split_whitespace();
                let (Some(i), Some(role), None) = (parts.next(), parts.next(), parts.next()) else {
                    return Err(err(lineno, "expected '# var <index> <role>'".into()));
                };
                let i: usize = i
                    .parse()
                    .map_err(|_| err(lineno, format!("bad index {i:?}")))?;
                if i >= n {
                    return Err(err(lineno, format!("index {i} >= n")));
                }
                roles[i] = Some(role.parse().map_err(|m| err(lineno, m))?);
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(i), Some(j), Some(c), None) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(err(lineno, "expected '<i> <j> <coefficient>'".into()));
            };
            let i: usize = i
                .parse()
                .map_err(|_| err(lineno, format!("bad index {i:?}")))?;
            let j: usize = j
                .parse()
                .map_err(|_| err(lineno, format!("bad index {j:?}")))?;
            let c: i64 = c
                .parse()
                .map_err(|_| err(lineno, format!("bad coefficient {c:?}")))?;
            if i > j {
                return Err(err(lineno, "term lines need i <= j".into()));
            }
            if i >= n || j >= n {
                return Err(err(lineno, format!("index outside n = {n}")));
            }
            if !seen.insert((i, j)) {
                return Err(err(lineno, format!("duplicate term ({i}, {j})")));
            }
            terms.push((i, j, c));
        }
        let roles = roles
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or_else(|| err(0, format!("variable {i} has no role"))))
            .collect::<Result<Vec<_>>>()?;
        QuboModel::new(roles, offset, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn evaluate_examples() {
        let m = QuboModel::new(vec![VariableRole::And], 5, [(0, 0, 2)]).unwrap();
        assert_eq!(m.evaluate(&[0]), 5);
        assert_eq!(m.evaluate(&[1]), 7);
    }

    #[test]
    fn merges_and_drops_zero_couplers() {
        let roles = vec![VariableRole::And; 3];
        let m = QuboModel::new(
            roles,
            0,
            [(0, 1, 3), (1, 0, -3), (2, 1, 4), (1, 1, 2), (1, 1, 1)],
        )
        .unwrap();
        assert_eq!(m.quadratic().len(), 1);
        assert_eq!(m.coupler(2, 1), 4);
        assert_eq!(m.linear()[1], 3);
    }

    #[test]
    fn text_format_exact() {
        let roles = vec![
            VariableRole::FactorP(1),
            VariableRole::FactorQ(1),
            VariableRole::Reduction(1, 1),
        ];
        let m = QuboModel::new(roles, 16, [(0, 0, -4), (0, 1, 4), (1, 2, -9), (2, 2, 3)]).unwrap();
        let text = m.to_text();
        assert_eq!(
            text,
            "# qubo n=3 offset=16\n# var 0 p1\n# var 1 q1\n# var 2 red1_1\n0 0 -4\n0 1 4\n1 2 -9\n2 2 3\n"
        );
        assert_eq!(QuboModel::from_text(&text).unwrap(), m);
    }

    #[test]
    fn text_parse_errors() {
        assert!(QuboModel::from_text("").is_err());
        assert!(QuboModel::from_text("# qubo n=1 offset=0\n0 0 1\n").is_err()); // no role
        assert!(QuboModel::from_text("# qubo n=1 offset=0\n# var 0 and\n0 1 1\n").is_err());
        assert!(
            QuboModel::from_text("# qubo n=2 offset=0\n# var 0 and\n# var 1 sum\n1 0 1\n").is_err()
        );
        assert!(QuboModel::from_text("# qubo n=1 offset=0\n# var 0 xyz\n").is_err());
    }

    fn role_strategy() -> impl Strategy<Value = VariableRole> {
        prop_oneof![
            (1u32..30).prop_map(VariableRole::FactorP),
            (1u32..30).prop_map(VariableRole::FactorQ),
            (1u32..30, 1u32..30).prop_map(|(i, k)| VariableRole::Reduction(i, k)),
            Just(VariableRole::And),
            Just(VariableRole::Sum),
            Just(VariableRole::Carry),
        ]
    }

    proptest! {
        #[test]
        fn text_roundtrip(
            roles in prop::collection::vec(role_strategy(), 1..12),
            offset in any::<i64>(),
            raw in prop::collection::vec((0usize..12, 0usize..12, -1_000_000i64..1_000_000), 0..40),
        ) {
            let n = roles.len();
            let terms: Vec<_> = raw.into_iter().map(|(i, j, c)| (i % n, j % n, c)).collect();
            let m = QuboModel::new(roles, offset, terms).unwrap();
            let back = QuboModel::from_text(&m.to_text()).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(back.to_text(), m.to_text());
        }
    }
}
