use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Vertical and horizontal qubit offsets of the standard Pegasus layout.
pub const VERTICAL_OFFSETS: [u32; 12] = [2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6];
pub const HORIZONTAL_OFFSETS: [u32; 12] = [6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10];

/// Pegasus coordinate `(u, w, k, z)`: orientation, perpendicular offset,
/// track within the tile and position along the qubit's length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PegasusCoord {
    pub u: u32,
    pub w: u32,
    pub k: u32,
    pub z: u32,
}

/// An undirected qubit-connectivity graph on ids `0..id_bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HardwareGraph {
    family: Option<u32>,
    present: Vec<bool>,
    adj: Vec<Vec<u32>>,
    num_nodes: usize,
    num_edges: usize,
}

impl HardwareGraph {
    /// Graph on the given nodes and edges; ids need not be contiguous.
    pub fn from_edges(
        nodes: impl IntoIterator<Item = u32>,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self> {
        let nodes: BTreeSet<u32> = nodes.into_iter().collect();
        let bound = nodes.iter().next_back().map_or(0, |&v| v as usize + 1);
        let mut present = vec![false; bound];
        for &v in &nodes {
            present[v as usize] = true;
        }
        let mut adj = vec![Vec::new(); bound];
        for (a, b) in edges {
            if a == b
                || !present.get(a as usize).copied().unwrap_or(false)
                || !present.get(b as usize).copied().unwrap_or(false)
            {
                return Err(Error::InvalidInput(format!(
                    "edge ({a}, {b}) is not between two distinct nodes"
                )));
            }
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        let mut num_edges = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            num_edges += list.len();
        }
        Ok(HardwareGraph {
            family: None,
            present,
            adj,
            num_nodes: nodes.len(),
            num_edges: num_edges / 2,
        })
    }

    /// Pegasus size parameter, if this graph came from [`build_pegasus`].
    pub fn pegasus_m(&self) -> Option<u32> {
        self.family
    }

    /// One past the largest possible node id.
    pub fn id_bound(&self) -> usize {
        self.present.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn has_node(&self, v: u32) -> bool {
        self.present.get(v as usize).copied().unwrap_or(false)
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.has_node(a) && self.adj[a as usize].binary_search(&b).is_ok()
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        self.adj.get(v as usize).map_or(&[], |l| l.as_slice())
    }

    pub fn nodes(&self) -> impl Iterator<Item = u32> + '_ {
        self.present
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(i, _)| i as u32)
    }

    /// Edges `(a, b)` with `a < b` in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adj.iter().enumerate().flat_map(|(a, l)| {
            l.iter()
                .filter(move |&&b| b as usize > a)
                .map(move |&b| (a as u32, b))
        })
    }

    /// Pegasus coordinate of a node id.
    pub fn coord(&self, v: u32) -> Option<PegasusCoord> {
        self.family.map(|m| linear_to_coord(m, v))
    }

    /// Midpoint of the qubit in the Pegasus plane, in track units.
    pub fn position(&self, v: u32) -> Option<(f64, f64)> {
        let c = self.coord(v)?;
        let along = |off: u32| 12.0 * c.z as f64 + off as f64 + 6.0;
        let across = 12.0 * c.w as f64 + c.k as f64 + 0.5;
        Some(if c.u == 0 {
            (across, along(VERTICAL_OFFSETS[c.k as usize]))
        } else {
            (along(HORIZONTAL_OFFSETS[c.k as usize]), across)
        })
    }

    pub fn remove_node(&mut self, v: u32) -> Result<()> {
        if !self.has_node(v) {
            return Err(Error::InvalidInput(format!(
                "defect qubit {v} not in graph"
            )));
        }
        let nbrs = std::mem::take(&mut self.adj[v as usize]);
        for &b in &nbrs {
            let list = &mut self.adj[b as usize];
            if let Ok(pos) = list.binary_search(&v) {
                list.remove(pos);
            }
        }
        self.num_edges -= nbrs.len();
        self.present[v as usize] = false;
        self.num_nodes -= 1;
        Ok(())
    }

    pub fn remove_edge(&mut self, a: u32, b: u32) -> Result<()> {
        if !self.has_edge(a, b) {
            return Err(Error::InvalidInput(format!(
                "defect coupler ({a}, {b}) not in graph"
            )));
        }
        for (x, y) in [(a, b), (b, a)] {
            let list = &mut self.adj[x as usize];
            let pos = list.binary_search(&y).expect("edge present");
            list.remove(pos);
        }
        self.num_edges -= 1;
        Ok(())
    }

    /// `# graph nodes=<n> edges=<e>` followed by `<a> <b>` lines.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        match self.family {
            Some(m) => writeln!(
                out,
                "# pegasus m={m} nodes={} edges={}",
                self.num_nodes, self.num_edges
            ),
            None => writeln!(
                out,
                "# graph nodes={} edges={}",
                self.num_nodes, self.num_edges
            ),
        }
        .expect("write to string");
        for (a, b) in self.edges() {
            writeln!(out, "{a} {b}").expect("write to string");
        }
        out
    }
}

pub fn coord_to_linear(m: u32, c: PegasusCoord) -> u32 {
    ((c.u * m + c.w) * 12 + c.k) * (m - 1) + c.z
}

pub fn linear_to_coord(m: u32, v: u32) -> PegasusCoord {
    let z = v % (m - 1);
    let rest = v / (m - 1);
    let k = rest % 12;
    let rest = rest / 12;
    PegasusCoord {
        u: rest / m,
        w: rest % m,
        k,
        z,
    }
}

/// Qubits removed "by fabrication": single ids and couplers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DefectList {
    pub qubits: Vec<u32>,
    pub couplers: Vec<(u32, u32)>,
}

impl DefectList {
    /// One id or `edge <i> <j>` per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = DefectList::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse {
                what: "defect list",
                line: idx + 1,
                msg,
            };
            let parts: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| {
                s.parse::<u32>()
                    .map_err(|_| err(format!("bad qubit id {s:?}")))
            };
            match parts.as_slice() {
                [id] => out.qubits.push(num(id)?),
                ["edge", a, b] => out.couplers.push((num(a)?, num(b)?)),
                _ => return Err(err(format!("unrecognised line {line:?}"))),
            }
        }
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for q in &self.qubits {
            out.push_str(&format!("{q}\n"));
        }
        for (a, b) in &self.couplers {
            out.push_str(&format!("edge {a} {b}\n"));
        }
        out
    }
}

/// The fabric of the ideal Pegasus graph `P_m` (qubits on the boundary
/// without internal couplers are dropped), minus the defects.
pub fn build_pegasus(m: u32, defects: &DefectList) -> Result<HardwareGraph> {
    if !(2..=64).contains(&m) {
        return Err(Error::InvalidInput(format!(
            "Pegasus size m = {m} outside 2..=64"
        )));
    }
    let m1 = m - 1;
    let (off0, off1) = (VERTICAL_OFFSETS, HORIZONTAL_OFFSETS);
    let start = [*off1.iter().min().unwrap(), *off0.iter().min().unwrap()];
    let end = [
        12 - *off1.iter().max().unwrap(),
        12 - *off0.iter().max().unwrap(),
    ];
    let in_fabric = |c: PegasusCoord| {
        let u = c.u as usize;
        if c.w == 0 && c.k < start[u] {
            return false;
        }
        if c.w == m1 && c.k >= 12 - end[u] {
            return false;
        }
        true
    };
    let mut edges = Vec::new();
    let mut nodes = BTreeSet::new();
    let mut push = |a: PegasusCoord, b: PegasusCoord| {
        if in_fabric(a) && in_fabric(b) {
            let (x, y) = (coord_to_linear(m, a), coord_to_linear(m, b));
            nodes.insert(x);
            nodes.insert(y);
            edges.push((x, y));
        }
    };
    for u in 0..2 {
        for w in 0..m {
            for k in 0..12 {
                for z in 0..m1 {
                    let c = PegasusCoord { u, w, k, z };
                    if z + 1 < m1 {
                        push(c, PegasusCoord { z: z + 1, ..c });
                    }
                    if k % 2 == 0 {
                        push(c, PegasusCoord { k: k + 1, ..c });
                    }
                }
            }
        }
    }
    for w in 0..m {
        for kk in 0..12u32 {
            let lo = if w == 0 { off1[kk as usize] } else { 0 };
            let hi = if w < m1 { 12 } else { off1[kk as usize] };
            for k in lo..hi {
                for z in 0..m1 {
                    let a = PegasusCoord { u: 0, w, k, z };
                    let b = PegasusCoord {
                        u: 1,
                        w: z + (kk < off0[k as usize]) as u32,
                        k: kk,
                        z: w - (k < off1[kk as usize]) as u32,
                    };
                    push(a, b);
                }
            }
        }
    }
    let mut g = HardwareGraph::from_edges(nodes, edges)?;
    g.family = Some(m);
    let bound = (24 * m * m1) as usize;
    g.present.resize(bound, false);
    g.adj.resize(bound, Vec::new());
    for &q in &defects.qubits {
        g.remove_node(q)?;
    }
    for &(a, b) in &defects.couplers {
        g.remove_edge(a, b)?;
    }
    Ok(g)
}
