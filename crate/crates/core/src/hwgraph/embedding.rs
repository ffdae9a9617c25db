use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::QuboModel;

use super::pegasus::HardwareGraph;

/// Logical variable `i` is represented by the physical qubits `chains[i]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    chains: Vec<Vec<u32>>,
}

impl Embedding {
    /// Chains are stored sorted and deduplicated.
    pub fn new(mut chains: Vec<Vec<u32>>) -> Self {
        for c in &mut chains {
            c.sort_unstable();
            c.dedup();
        }
        Embedding { chains }
    }

    /// Every variable on its own qubit `ids[i]`.
    pub fn identity(ids: &[u32]) -> Self {
        Embedding::new(ids.iter().map(|&q| vec![q]).collect())
    }

    pub fn chains(&self) -> &[Vec<u32>] {
        &self.chains
    }

    pub fn chain(&self, v: usize) -> &[u32] {
        &self.chains[v]
    }

    pub fn num_vars(&self) -> usize {
        self.chains.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn max_chain_length(&self) -> usize {
        self.chains.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `chain <logical> <id> <id> ...` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (v, c) in self.chains.iter().enumerate() {
            out.push_str(&format!("chain {v}"));
            for q in c {
                out.push_str(&format!(" {q}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut chains: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse {
                what: "embedding",
                line: idx + 1,
                msg,
            };
            let mut parts = line.split_whitespace();
            if parts.next() != Some("chain") {
                return Err(err("expected 'chain <logical> <id> ...'".into()));
            }
            let v: usize = parts
                .next()
                .ok_or_else(|| err("missing logical index".into()))?
                .parse()
                .map_err(|_| err("bad logical index".into()))?;
            let ids = parts
                .map(|s| {
                    s.parse::<u32>()
                        .map_err(|_| err(format!("bad qubit id {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if chains.insert(v, ids).is_some() {
                return Err(err(format!("duplicate chain {v}")));
            }
        }
        let n = chains.keys().next_back().map_or(0, |&v| v + 1);
        if chains.len() != n {
            return Err(Error::Parse {
                what: "embedding",
                line: 0,
                msg: "logical indices must be 0..n without gaps".into(),
            });
        }
        Ok(Embedding::new(chains.into_values().collect()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    ChainCount { expected: usize, found: usize },
    EmptyChain(usize),
    MissingQubit { var: usize, qubit: u32 },
    Overlap { qubit: u32, vars: (usize, usize) },
    Disconnected { var: usize, components: usize },
    MissingCoupler(usize, usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ChainCount { expected, found } => {
                write!(f, "{found} chains for {expected} variables")
            }
            Violation::EmptyChain(v) => write!(f, "variable {v} has an empty chain"),
            Violation::MissingQubit { var, qubit } => {
                write!(f, "chain {var} uses absent qubit {qubit}")
            }
            Violation::Overlap { qubit, vars } => write!(
                f,
                "qubit {qubit} shared by chains {} and {}",
                vars.0, vars.1
            ),
            Violation::Disconnected { var, components } => {
                write!(f, "chain {var} has {components} components")
            }
            Violation::MissingCoupler(i, j) => {
                write!(f, "no physical edge between chains {i} and {j}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub violations: Vec<Violation>,
}

impl EmbeddingReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn components(graph: &HardwareGraph, chain: &[u32]) -> usize {
    let set: BTreeSet<u32> = chain.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut count = 0;
    for &s in chain {
        if !seen.insert(s) {
            continue;
        }
        count += 1;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &y in graph.neighbors(x) {
                if set.contains(&y) && seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
    }
    count
}

fn chains_touch(graph: &HardwareGraph, a: &[u32], b: &[u32]) -> bool {
    a.iter().any(|&x| {
        graph
            .neighbors(x)
            .iter()
            .any(|y| b.binary_search(y).is_ok())
    })
}

/// Checks chain count, disjointness, connectivity and that every nonzero
/// coupler has a physical edge between its chains. Reports every violation.
pub fn verify_embedding(
    model: &QuboModel,
    graph: &HardwareGraph,
    embedding: &Embedding,
) -> EmbeddingReport {
    let mut violations = Vec::new();
    let n = model.num_vars();
    if embedding.num_vars() != n {
        violations.push(Violation::ChainCount {
            expected: n,
            found: embedding.num_vars(),
        });
    }
    let mut owner: HashMap<u32, usize> = HashMap::new();
    for (v, chain) in embedding.chains().iter().enumerate() {
        if chain.is_empty() {
            violations.push(Violation::EmptyChain(v));
            continue;
        }
        for &q in chain {
            if !graph.has_node(q) {
                violations.push(Violation::MissingQubit { var: v, qubit: q });
            }
            if let Some(&other) = owner.get(&q) {
                violations.push(Violation::Overlap {
                    qubit: q,
                    vars: (other, v),
                });
            } else {
                owner.insert(q, v);
            }
        }
        let c = components(graph, chain);
        if c > 1 {
            violations.push(Violation::Disconnected {
                var: v,
                components: c,
            });
        }
    }
    for &(i, j) in model.quadratic().keys() {
        if i >= embedding.num_vars() || j >= embedding.num_vars() {
            continue;
        }
        if !chains_touch(graph, embedding.chain(i), embedding.chain(j)) {
            violations.push(Violation::MissingCoupler(i, j));
        }
    }
    EmbeddingReport { violations }
}

/// How strongly qubits of one chain are tied together.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainStrength {
    /// `1 + max |coefficient|` incident to the chain's variable.
    Auto,
    /// `1 + sum |coefficient|` incident to the variable; large enough that no
    /// chain-broken state can be a ground state.
    Safe,
    Uniform(i64),
}

impl ChainStrength {
    pub fn per_variable(self, model: &QuboModel) -> Result<Vec<i64>> {
        let out: Vec<i64> = match self {
            ChainStrength::Auto => model
                .incident_abs_max()
                .iter()
                .map(|&c| c.saturating_add(1))
                .collect(),
            ChainStrength::Safe => model
                .incident_abs_sums()
                .iter()
                .map(|&c| {
                    i64::try_from(c + 1).map_err(|_| Error::CoefficientOverflow("chain strength"))
                })
                .collect::<Result<_>>()?,
            ChainStrength::Uniform(c) => {
                if c <= 0 {
                    return Err(Error::InvalidInput(
                        "chain strength must be positive".into(),
                    ));
                }
                vec![c; model.num_vars()]
            }
        };
        Ok(out)
    }
}

/// A logical model transferred onto physical qubits.
///
/// Physical variables are ordered chain by chain: all qubits of logical
/// variable 0 in ascending id order, then those of variable 1, and so on.
#[derive(Clone, Debug)]
pub struct EmbeddedModel {
    pub model: QuboModel,
    pub qubits: Vec<u32>,
    pub logical_of: Vec<usize>,
    pub chain_strengths: Vec<i64>,
    pub embedding: Embedding,
}

impl EmbeddedModel {
    /// Copies each logical value onto its whole chain.
    pub fn spread(&self, logical: &[u8]) -> Vec<u8> {
        self.logical_of.iter().map(|&v| logical[v]).collect()
    }

    pub fn unembed(&self, physical: &[u8]) -> (Vec<u8>, usize) {
        unembed_sample(physical, &self.embedding)
    }
}

fn spanning_tree(graph: &HardwareGraph, chain: &[u32]) -> Vec<(u32, u32)> {
    let mut tree = Vec::new();
    let Some(&root) = chain.first() else {
        return tree;
    };
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        for &y in graph.neighbors(x) {
            if chain.binary_search(&y).is_ok() && seen.insert(y) {
                tree.push((x, y));
                queue.push_back(y);
            }
        }
    }
    tree
}

/// Builds the physical model: linear terms split over the chain (integer
/// division, remainder to the first qubits), each coupler on the smallest
/// physical edge between the two chains, and `cs (x + y - 2xy)` along a
/// spanning tree of every chain.
pub fn embed_model(
    model: &QuboModel,
    graph: &HardwareGraph,
    embedding: &Embedding,
    strength: ChainStrength,
) -> Result<EmbeddedModel> {
    let report = verify_embedding(model, graph, embedding);
    if !report.is_valid() {
        return Err(Error::InvalidEmbedding(report.violations.len()));
    }
    let strengths = strength.per_variable(model)?;
    let mut qubits = Vec::with_capacity(embedding.num_qubits());
    let mut logical_of = Vec::with_capacity(embedding.num_qubits());
    let mut index: HashMap<u32, usize> = HashMap::new();
    for (v, chain) in embedding.chains().iter().enumerate() {
        for &q in chain {
            index.insert(q, qubits.len());
            qubits.push(q);
            logical_of.push(v);
        }
    }
    let mut terms: Vec<(usize, usize, i64)> = Vec::new();
    for (v, &a) in model.linear().iter().enumerate() {
        let chain = embedding.chain(v);
        let len = chain.len() as i64;
        let (base, rem) = (a.div_euclid(len), a.rem_euclid(len));
        for (pos, q) in chain.iter().enumerate() {
            let share = base + i64::from((pos as i64) < rem);
            terms.push((index[q], index[q], share));
        }
    }
    for (&(i, j), &b) in model.quadratic() {
        let (ci, cj) = (embedding.chain(i), embedding.chain(j));
        let edge = ci
            .iter()
            .flat_map(|&x| {
                graph
                    .neighbors(x)
                    .iter()
                    .filter(|y| cj.binary_search(y).is_ok())
                    .map(move |&y| (x.min(y), x.max(y)))
            })
            .min()
            .expect("verified coupler");
        terms.push((index[&edge.0], index[&edge.1], b));
    }
    for (v, chain) in embedding.chains().iter().enumerate() {
        let cs = strengths[v];
        for (x, y) in spanning_tree(graph, chain) {
            let (ix, iy) = (index[&x], index[&y]);
            terms.push((ix, ix, cs));
            terms.push((iy, iy, cs));
            let c = cs
                .checked_mul(-2)
                .ok_or(Error::CoefficientOverflow("chain penalty"))?;
            terms.push((ix, iy, c));
        }
    }
    let roles = logical_of.iter().map(|&v| model.roles()[v]).collect();
    let physical = QuboModel::new(roles, model.offset(), terms)?;
    Ok(EmbeddedModel {
        model: physical,
        qubits,
        logical_of,
        chain_strengths: strengths,
        embedding: embedding.clone(),
    })
}

/// Majority vote per chain (ties go to 0). `physical` is in chain order.
/// Returns the logical assignment and the number of broken chains.
pub fn unembed_sample(physical: &[u8], embedding: &Embedding) -> (Vec<u8>, usize) {
    let mut out = Vec::with_capacity(embedding.num_vars());
    let mut broken = 0;
    let mut pos = 0;
    for chain in embedding.chains() {
        let bits = &physical[pos..pos + chain.len()];
        pos += chain.len();
        let ones = bits.iter().filter(|&&b| b != 0).count();
        if ones != 0 && ones != bits.len() {
            broken += 1;
        }
        out.push(u8::from(2 * ones > bits.len()));
    }
    (out, broken)
}
