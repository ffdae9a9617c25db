//! Chain routing by negotiated congestion.
//!
//! Each logical variable is placed at the qubit minimising the summed path
//! cost to its already-placed neighbours, and its chain is the union of those
//! shortest paths. Overlapping chains are allowed while routing but become
//! more expensive every pass (present and history penalties), until no qubit
//! is shared or the pass budget runs out.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qubo::{QuboModel, TileGrid};

use super::embedding::{verify_embedding, Embedding};
use super::pegasus::HardwareGraph;

const FORBIDDEN: u32 = u32::MAX;
const NONE: u32 = u32::MAX;
const INF: u64 = u64::MAX;

/// Pass budget of the router.
pub const DEFAULT_MAX_PASSES: usize = 64;

/// History added to a shared qubit per extra user and pass.
const HISTORY_STEP: u64 = 8;

/// History added to the neighbours of a shared qubit, so that chains
/// crowding a hot spot also move away.
const HISTORY_SPREAD: u64 = 8;

/// Passes without fewer shared qubits after which routing gives up.
const STALL_PASSES: usize = 12;

struct Router<'a> {
    graph: &'a HardwareGraph,
    adj: Vec<Vec<usize>>,
    /// Per-variable node bias; [`FORBIDDEN`] outside the variable's region.
    bias: Vec<Option<Vec<u32>>>,
    usage: Vec<u32>,
    history: Vec<u64>,
    chains: Vec<Vec<u32>>,
    tiebreak: Vec<u32>,
    present_weight: u64,
    nodes: Vec<u32>,
    /// Qubits owned by fixed chains.
    blocked: Vec<bool>,
}

impl<'a> Router<'a> {
    fn new(
        graph: &'a HardwareGraph,
        adj: Vec<Vec<usize>>,
        bias: Vec<Option<Vec<u32>>>,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let bound = graph.id_bound();
        let n = adj.len();
        Router {
            graph,
            adj,
            bias,
            usage: vec![0; bound],
            history: vec![0; bound],
            chains: vec![Vec::new(); n],
            tiebreak: (0..bound).map(|_| rng.random()).collect(),
            present_weight: 1,
            nodes: graph.nodes().collect(),
            blocked: vec![false; bound],
        }
    }

    #[inline]
    fn cost(&self, v: usize, q: u32) -> u64 {
        let b = match &self.bias[v] {
            Some(b) => b[q as usize],
            None => 0,
        };
        if b == FORBIDDEN || self.blocked[q as usize] {
            return INF;
        }
        let base = 1 + b as u64 + self.history[q as usize];
        base.saturating_mul(self.present_weight.saturating_pow(self.usage[q as usize]))
    }

    /// Cheapest path cost from every node to a node adjacent to `chain(u)`,
    /// counting node costs of the path including both ends.
    fn distances(&self, v: usize, u: usize, in_u: &mut [bool]) -> (Vec<u64>, Vec<u32>) {
        let bound = self.graph.id_bound();
        let mut dist = vec![INF; bound];
        let mut parent = vec![NONE; bound];
        let mut heap = BinaryHeap::new();
        for &x in &self.chains[u] {
            in_u[x as usize] = true;
        }
        for &x in &self.chains[u] {
            for &y in self.graph.neighbors(x) {
                if in_u[y as usize] {
                    continue;
                }
                let c = self.cost(v, y);
                if c < dist[y as usize] {
                    dist[y as usize] = c;
                    heap.push(Reverse((c, y)));
                }
            }
        }
        while let Some(Reverse((d, y))) = heap.pop() {
            if d > dist[y as usize] {
                continue;
            }
            for &z in self.graph.neighbors(y) {
                if in_u[z as usize] {
                    continue;
                }
                let c = self.cost(v, z);
                if c == INF {
                    continue;
                }
                let nd = d + c;
                if nd < dist[z as usize] {
                    dist[z as usize] = nd;
                    parent[z as usize] = y;
                    heap.push(Reverse((nd, z)));
                }
            }
        }
        for &x in &self.chains[u] {
            in_u[x as usize] = false;
        }
        (dist, parent)
    }

    fn set_chain(&mut self, v: usize, chain: Vec<u32>) {
        for &q in &self.chains[v] {
            self.usage[q as usize] -= 1;
        }
        for &q in &chain {
            self.usage[q as usize] += 1;
        }
        self.chains[v] = chain;
    }

    fn place_alone(&mut self, v: usize) -> bool {
        let best = self
            .nodes
            .iter()
            .copied()
            .filter(|&q| self.cost(v, q) != INF)
            .min_by_key(|&q| (self.cost(v, q), self.tiebreak[q as usize]));
        match best {
            Some(q) => {
                self.set_chain(v, vec![q]);
                true
            }
            None => false,
        }
    }

    /// Logical edges whose chains do not touch.
    fn missing(&self) -> usize {
        let mut count = 0;
        for (v, nbrs) in self.adj.iter().enumerate() {
            for &u in nbrs {
                if u > v
                    && !self.chains[v].iter().any(|&x| {
                        self.graph
                            .neighbors(x)
                            .iter()
                            .any(|y| self.chains[u].binary_search(y).is_ok())
                    })
                {
                    count += 1;
                }
            }
        }
        count
    }

    /// Re-routes `v`; returns false if no placement reaches every neighbour.
    fn route(&mut self, v: usize, scratch: &mut [bool]) -> bool {
        self.set_chain(v, Vec::new());
        let placed: Vec<usize> = self.adj[v]
            .iter()
            .copied()
            .filter(|&u| !self.chains[u].is_empty())
            .collect();
        if placed.is_empty() {
            return self.place_alone(v);
        }
        let mut fields: Vec<(Vec<u64>, Vec<u32>)> = Vec::with_capacity(placed.len());
        let mut reached: Vec<usize> = Vec::with_capacity(placed.len());
        for &u in &placed {
            let f = self.distances(v, u, scratch);
            // Neighbours out of reach are left for a later pass.
            if f.0.iter().any(|&d| d != INF) {
                fields.push(f);
                reached.push(u);
            }
        }
        if fields.is_empty() {
            return self.place_alone(v);
        }
        let placed = reached;
        let extra = placed.len() as u64 - 1;
        let mut best: Option<(u64, u32, u32)> = None;
        for &q in &self.nodes {
            let mut total = 0u64;
            let mut ok = true;
            for (d, _) in &fields {
                let x = d[q as usize];
                if x == INF {
                    ok = false;
                    break;
                }
                total = total.saturating_add(x);
            }
            if !ok {
                continue;
            }
            let total = total - extra * self.cost(v, q);
            let key = (total, self.tiebreak[q as usize], q);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        let Some((_, _, root)) = best else {
            return false;
        };
        // Grow a Steiner-like tree: connect neighbours nearest to the root
        // first, each by the cheapest path from the chain built so far.
        let mut targets: Vec<(u64, usize)> = placed
            .iter()
            .zip(&fields)
            .map(|(&u, (d, _))| (d[root as usize], u))
            .collect();
        targets.sort_unstable();
        let mut chain = vec![root];
        for (_, u) in targets {
            match self.connect(v, &chain, u, scratch) {
                Some(path) => chain.extend(path),
                None => return false,
            }
        }
        chain.sort_unstable();
        chain.dedup();
        self.set_chain(v, chain);
        true
    }

    /// Cheapest path of new qubits from `chain` to a qubit next to `chain(u)`.
    /// Returns an empty path if the two chains already touch.
    fn connect(&self, v: usize, chain: &[u32], u: usize, mark: &mut [bool]) -> Option<Vec<u32>> {
        let touches = |x: u32| {
            self.graph
                .neighbors(x)
                .iter()
                .any(|y| self.chains[u].binary_search(y).is_ok())
        };
        if chain.iter().any(|&x| touches(x)) {
            return Some(Vec::new());
        }
        for &x in &self.chains[u] {
            mark[x as usize] = true;
        }
        let mut dist: std::collections::HashMap<u32, (u64, u32)> = std::collections::HashMap::new();
        let mut heap = BinaryHeap::new();
        for &x in chain {
            dist.insert(x, (0, NONE));
            heap.push(Reverse((0u64, x)));
        }
        let mut found = None;
        while let Some(Reverse((d, y))) = heap.pop() {
            if dist.get(&y).is_some_and(|&(best, _)| d > best) {
                continue;
            }
            if d > 0 && touches(y) {
                found = Some(y);
                break;
            }
            for &z in self.graph.neighbors(y) {
                if mark[z as usize] {
                    continue;
                }
                let c = self.cost(v, z);
                if c == INF {
                    continue;
                }
                let nd = d + c;
                if dist.get(&z).is_none_or(|&(best, _)| nd < best) {
                    dist.insert(z, (nd, y));
                    heap.push(Reverse((nd, z)));
                }
            }
        }
        for &x in &self.chains[u] {
            mark[x as usize] = false;
        }
        let mut x = found?;
        let mut path = Vec::new();
        while dist[&x].0 > 0 {
            path.push(x);
            x = dist[&x].1;
        }
        Some(path)
    }

    /// True if `chain` minus `drop` stays connected and still touches every
    /// placed neighbour of `v`.
    fn removable(&self, v: usize, chain: &[u32], drop: u32) -> bool {
        let rest: Vec<u32> = chain.iter().copied().filter(|&x| x != drop).collect();
        if rest.is_empty() {
            return false;
        }
        for &u in &self.adj[v] {
            if self.chains[u].is_empty() {
                continue;
            }
            let touches = rest.iter().any(|&x| {
                self.graph
                    .neighbors(x)
                    .iter()
                    .any(|y| self.chains[u].binary_search(y).is_ok())
            });
            if !touches {
                return false;
            }
        }
        let mut seen = vec![rest[0]];
        let mut stack = vec![rest[0]];
        while let Some(x) = stack.pop() {
            for &y in self.graph.neighbors(x) {
                if rest.binary_search(&y).is_ok() && !seen.contains(&y) {
                    seen.push(y);
                    stack.push(y);
                }
            }
        }
        seen.len() == rest.len()
    }

    /// Drops redundant qubits from `v`'s chain, shared ones first.
    fn prune(&mut self, v: usize) {
        let mut chain = self.chains[v].clone();
        let mut candidates = chain.clone();
        candidates.sort_by_key(|&q| Reverse(self.usage[q as usize]));
        for q in candidates {
            if chain.len() > 1 && self.removable(v, &chain, q) {
                chain.retain(|&x| x != q);
            }
        }
        if chain.len() != self.chains[v].len() {
            self.set_chain(v, chain);
        }
    }

    fn overused(&self) -> Vec<u32> {
        self.nodes
            .iter()
            .copied()
            .filter(|&q| self.usage[q as usize] > 1)
            .collect()
    }
}

/// Breadth-first placement order: start from the highest-degree variable,
/// then always take the variable with most placed neighbours.
fn placement_order(adj: &[Vec<usize>], key: &[u32]) -> Vec<usize> {
    let n = adj.len();
    let mut placed = vec![false; n];
    let mut links = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| (links[v], adj[v].len(), Reverse(key[v]), Reverse(v)))
            .expect("unplaced variable");
        placed[v] = true;
        order.push(v);
        for &u in &adj[v] {
            links[u] += 1;
        }
    }
    order
}

fn logical_adjacency(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, j) in pairs {
        if i != j {
            adj[i].insert(j);
            adj[j].insert(i);
        }
    }
    adj.into_iter().map(|s| s.into_iter().collect()).collect()
}

fn run(
    graph: &HardwareGraph,
    adj: Vec<Vec<usize>>,
    bias: Vec<Option<Vec<u32>>>,
    fixed: Vec<Vec<u32>>,
    initial_order: Option<Vec<usize>>,
    seed: u64,
    max_passes: usize,
) -> Result<Embedding> {
    let n = adj.len();
    if n == 0 {
        return Err(Error::EmbeddingFailed("model has no variables".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let key: Vec<u32> = (0..n).map(|_| rng.random()).collect();
    let is_fixed: Vec<bool> = (0..n)
        .map(|v| fixed.get(v).is_some_and(|c| !c.is_empty()))
        .collect();
    let mut order = initial_order.unwrap_or_else(|| placement_order(&adj, &key));
    order.retain(|&v| !is_fixed[v]);
    let mut router = Router::new(graph, adj, bias, &mut rng);
    for (v, chain) in fixed.into_iter().enumerate() {
        for &q in &chain {
            router.blocked[q as usize] = true;
        }
        if !chain.is_empty() {
            router.set_chain(v, chain);
        }
    }
    let mut scratch = vec![false; graph.id_bound()];
    let mut best = (usize::MAX, 0);
    for pass in 0..max_passes {
        router.present_weight = 1u64 << (3 + pass as u32).min(20);
        for &v in &order {
            if !router.route(v, &mut scratch) {
                return Err(Error::EmbeddingFailed(format!(
                    "no qubit available for variable {v}"
                )));
            }
        }
        for &v in &order {
            router.prune(v);
        }
        let over = router.overused();
        if over.is_empty() && router.missing() == 0 {
            let emb = Embedding::new(router.chains.clone());
            log::debug!(
                "routed {n} variables in {} passes, {} qubits",
                pass + 1,
                emb.num_qubits()
            );
            return Ok(emb);
        }
        if over.len() < best.0 {
            best = (over.len(), pass);
        } else if pass - best.1 >= STALL_PASSES {
            break;
        }
        for q in over {
            let extra = router.usage[q as usize] as u64 - 1;
            router.history[q as usize] += HISTORY_STEP * extra;
            for &y in graph.neighbors(q) {
                router.history[y as usize] += HISTORY_SPREAD * extra;
            }
        }
        order.shuffle(&mut rng);
    }
    Err(Error::EmbeddingFailed(format!(
        "chains still overlap after {max_passes} routing passes"
    )))
}

/// Finds a minor embedding of the model's coupler graph; deterministic given
/// the seed. Failure means resources ran out and a new seed may help.
pub fn embed_heuristic(model: &QuboModel, graph: &HardwareGraph, seed: u64) -> Result<Embedding> {
    embed_heuristic_with(model, graph, seed, DEFAULT_MAX_PASSES)
}

pub fn embed_heuristic_with(
    model: &QuboModel,
    graph: &HardwareGraph,
    seed: u64,
    max_passes: usize,
) -> Result<Embedding> {
    let n = model.num_vars();
    let adj = logical_adjacency(n, model.quadratic().keys().copied());
    let emb = run(
        graph,
        adj,
        vec![None; n],
        Vec::new(),
        None,
        seed,
        max_passes,
    )?;
    let report = verify_embedding(model, graph, &emb);
    if !report.is_valid() {
        return Err(Error::EmbeddingFailed(format!(
            "router produced {} violations",
            report.violations.len()
        )));
    }
    Ok(emb)
}

/// Base cost of a backbone qubit against its squared offset from the line.
const HOP_COST: u64 = 30;

/// Router seeds tried before the placement fails.
const PLACEMENT_ATTEMPTS: u64 = 8;

/// Smallest cell edge, in track units, a CFA tile may be given.
const MIN_CELL: f64 = 4.0;

type Point = (f64, f64);

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

/// Cheapest qubit path from near `a` to near `b` staying close to the
/// segment between them and off `blocked` qubits.
fn corridor_path(
    graph: &HardwareGraph,
    nodes: &[u32],
    pos: &[Point],
    blocked: &[bool],
    a: Point,
    b: Point,
    unit: f64,
) -> Option<Vec<u32>> {
    let bound = graph.id_bound();
    let mut cost = vec![INF; bound];
    let mut ends = [(f64::MAX, NONE), (f64::MAX, NONE)];
    for (&q, &p) in nodes.iter().zip(pos) {
        if blocked[q as usize] {
            continue;
        }
        let d = segment_distance(p, a, b) / unit;
        cost[q as usize] = HOP_COST + (d * d) as u64;
        for (end, target) in ends.iter_mut().zip([a, b]) {
            let e = (p.0 - target.0).hypot(p.1 - target.1);
            if e < end.0 {
                *end = (e, q);
            }
        }
    }
    let (source, sink) = (ends[0].1, ends[1].1);
    if source == NONE {
        return None;
    }
    let mut dist = vec![INF; bound];
    let mut parent = vec![NONE; bound];
    let mut heap = BinaryHeap::new();
    dist[source as usize] = cost[source as usize];
    heap.push(Reverse((dist[source as usize], source)));
    while let Some(Reverse((d, y))) = heap.pop() {
        if y == sink {
            break;
        }
        if d > dist[y as usize] {
            continue;
        }
        for &z in graph.neighbors(y) {
            let c = cost[z as usize];
            if c == INF {
                continue;
            }
            if d + c < dist[z as usize] {
                dist[z as usize] = d + c;
                parent[z as usize] = y;
                heap.push(Reverse((d + c, z)));
            }
        }
    }
    if dist[sink as usize] == INF {
        return None;
    }
    let mut path = vec![sink];
    let mut x = sink;
    while x != source {
        x = parent[x as usize];
        path.push(x);
    }
    path.sort_unstable();
    Some(path)
}

/// Places the CFA grid on a Pegasus graph. Tile `(i, j)` is anchored at cell
/// column `j`, shifted down one cell per row and a fraction of a cell per
/// column, so the cells holding one `q_i` form a diagonal. Each `p_j` chain
/// is a straight vertical track through its column and each `q_i` chain a
/// staircase along its diagonal; crossing every track, it meets every `p_j`.
/// The remaining tile variables are routed around the crossings.
pub fn build_cfa_placement(grid: &TileGrid, graph: &HardwareGraph) -> Result<Embedding> {
    if graph.pegasus_m().is_none() {
        return Err(Error::EmbeddingFailed(
            "CFA placement needs a Pegasus graph".into(),
        ));
    }
    let n = grid
        .tiles
        .iter()
        .flat_map(|t| t.vars.iter())
        .max()
        .map_or(0, |&v| v + 1);
    let adj = logical_adjacency(
        n,
        grid.tiles.iter().flat_map(|t| t.couplers.iter().copied()),
    );
    let nodes: Vec<u32> = graph.nodes().collect();
    let pos: Vec<Point> = nodes
        .iter()
        .map(|&q| graph.position(q).expect("pegasus"))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &pos {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let cols = grid.l_p as f64;
    let rows = (grid.l_q - 1) as f64;
    // Square cells of at most one Pegasus tile; the diagonal is flattened
    // just enough for the grid to fit.
    let cell = ((x1 - x0) / cols).min(12.0);
    let spare = (y1 - y0) / cell - rows;
    let slope = if grid.l_p > 1 {
        (spare / (cols - 1.0)).min(1.0)
    } else {
        0.0
    };
    if cell < MIN_CELL || slope < 0.25 {
        return Err(Error::EmbeddingFailed(format!(
            "{}x{} tile grid does not fit the graph",
            grid.l_p,
            grid.l_q - 1
        )));
    }
    let width = cols * cell;
    let height = (rows + slope * (cols - 1.0)) * cell;
    let (ox, oy) = (
        x0 + 0.5 * ((x1 - x0) - width),
        y0 + 0.5 * ((y1 - y0) - height),
    );
    // Column centres sit on a track so the p chains can run straight.
    let center = |row: u32, col: u32| -> Point {
        let x = (ox + (col as f64 + 0.5) * cell).floor() + 0.5;
        (x, oy + ((row - 1) as f64 + slope * col as f64 + 0.5) * cell)
    };
    let mut centers: Vec<Vec<Point>> = vec![Vec::new(); n];
    for t in &grid.tiles {
        for &v in &t.vars {
            centers[v].push(center(t.row, t.col));
        }
    }

    let mut blocked = vec![false; graph.id_bound()];
    let mut fixed: Vec<Vec<u32>> = vec![Vec::new(); n];
    let fail = |what: String| Error::EmbeddingFailed(format!("no corridor for {what}"));
    let mut backbone =
        |v: usize, a: Point, b: Point, unit: f64, fixed: &mut Vec<Vec<u32>>| -> Result<()> {
            if !fixed[v].is_empty() {
                return Ok(());
            }
            let path = corridor_path(graph, &nodes, &pos, &blocked, a, b, unit)
                .ok_or_else(|| fail(format!("variable {v}")))?;
            for &q in &path {
                blocked[q as usize] = true;
            }
            fixed[v] = path;
            Ok(())
        };
    let half = 0.5 * cell;
    for t in &grid.tiles {
        if let Some(p) = t.p {
            let (a, b) = column_span(grid, t.col, &center);
            backbone(p, (a.0, a.1 - half), (b.0, b.1 + half), 1.0, &mut fixed)?;
        }
    }
    for t in &grid.tiles {
        if let Some(q) = t.q {
            let (a, b) = row_span(grid, t.row, &center);
            let lead = (half, half * slope);
            backbone(
                q,
                (a.0 - lead.0, a.1 - lead.1),
                (b.0 + lead.0, b.1 + lead.1),
                3.0,
                &mut fixed,
            )?;
        }
    }

    let radius = 2.0 * cell;
    let unit = 0.5 * cell;
    let bias: Vec<Option<Vec<u32>>> = centers
        .iter()
        .map(|cs| {
            if cs.is_empty() {
                return None;
            }
            let mut b = vec![FORBIDDEN; graph.id_bound()];
            for (&q, &(x, y)) in nodes.iter().zip(&pos) {
                let d = cs
                    .iter()
                    .map(|&(cx, cy)| (x - cx).hypot(y - cy))
                    .fold(f64::MAX, f64::min);
                if d <= radius {
                    let r = (d / unit) as u32;
                    b[q as usize] = r * r;
                }
            }
            Some(b)
        })
        .collect();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for t in &grid.tiles {
        for &v in &t.vars {
            if !std::mem::replace(&mut seen[v], true) {
                order.push(v);
            }
        }
    }
    order.extend((0..n).filter(|&v| !seen[v]));
    let mut attempt = 0;
    let emb = loop {
        match run(
            graph,
            adj.clone(),
            bias.clone(),
            fixed.clone(),
            Some(order.clone()),
            attempt,
            DEFAULT_MAX_PASSES,
        ) {
            Ok(emb) => break emb,
            Err(e) if attempt + 1 >= PLACEMENT_ATTEMPTS => return Err(e),
            Err(_) => attempt += 1,
        }
    };
    let mut check = crate::qubo::Poly::default();
    for t in &grid.tiles {
        for &(i, j) in &t.couplers {
            check.add_quadratic(i, j, 1);
        }
    }
    let roles = vec![crate::qubo::VariableRole::And; n];
    let coupling = check.into_model(roles, "placement")?;
    let report = verify_embedding(&coupling, graph, &emb);
    if !report.is_valid() {
        return Err(Error::EmbeddingFailed(format!(
            "placement has {} violations",
            report.violations.len()
        )));
    }
    Ok(emb)
}

fn column_span(grid: &TileGrid, col: u32, center: &impl Fn(u32, u32) -> Point) -> (Point, Point) {
    let rows = grid.tiles.iter().filter(|t| t.col == col).map(|t| t.row);
    let (lo, hi) = (rows.clone().min().unwrap_or(1), rows.max().unwrap_or(1));
    (center(lo, col), center(hi, col))
}

fn row_span(grid: &TileGrid, row: u32, center: &impl Fn(u32, u32) -> Point) -> (Point, Point) {
    let cols = grid.tiles.iter().filter(|t| t.row == row).map(|t| t.col);
    let (lo, hi) = (cols.clone().min().unwrap_or(0), cols.max().unwrap_or(0));
    (center(row, lo), center(row, hi))
}
