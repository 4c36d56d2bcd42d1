//! Prize-collecting Steiner trees on small node-weighted graphs.
//!
//! The objective is maximized net worth: sum of kept node prizes minus sum of
//! kept edge costs. The empty tree is a feasible solution with objective 0.
//!
//! Two solvers share the contract:
//! - `Exact` enumerates connected node subsets (guarded at 20 nodes) and
//!   connects each subset at its minimum spanning cost; ties in objective are
//!   broken toward the lexicographically smallest sorted node-id set.
//! - `Approx` runs cluster growing in the Goemans-Williamson style: clusters
//!   grow moats at the rate of their remaining prize, merge when an edge goes
//!   tight, deactivate when their prize is spent, and the grown forest is
//!   strong-pruned to the best net-worth subtree. Tie-breaking is by node id,
//!   so the result is deterministic.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kg::EntityId;

/// Node limit for the exact solver.
pub const EXACT_NODE_GUARD: usize = 20;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    Exact,
    Approx,
}

/// Undirected edge with a positive cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrizedEdge {
    pub a: usize,
    pub b: usize,
    pub cost: f64,
}

/// Node-prized, edge-costed undirected graph.
#[derive(Debug, Clone, Default)]
pub struct PrizedGraph {
    prizes: Vec<f64>,
    edges: Vec<PrizedEdge>,
}

impl PrizedGraph {
    /// Creates a graph with the given non-negative node prizes.
    pub fn new(prizes: Vec<f64>) -> Result<Self> {
        if prizes.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::input("prizes must be finite and non-negative"));
        }
        Ok(PrizedGraph {
            prizes,
            edges: Vec::new(),
        })
    }

    pub fn add_edge(&mut self, a: usize, b: usize, cost: f64) -> Result<usize> {
        let n = self.prizes.len();
        if a >= n || b >= n {
            return Err(Error::input(format!(
                "edge ({a}, {b}) references a node outside 0..{n}"
            )));
        }
        if a == b {
            return Err(Error::input(format!("self-loop on node {a}")));
        }
        if !cost.is_finite() || cost <= 0.0 {
            return Err(Error::input(format!("edge cost must be positive, got {cost}")));
        }
        self.edges.push(PrizedEdge { a, b, cost });
        Ok(self.edges.len() - 1)
    }

    pub fn node_count(&self) -> usize {
        self.prizes.len()
    }

    pub fn prize(&self, node: usize) -> f64 {
        self.prizes[node]
    }

    pub fn edges(&self) -> &[PrizedEdge] {
        &self.edges
    }
}

/// A connected, acyclic subgraph plus its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct PcstSolution {
    /// Kept nodes, ascending.
    pub nodes: Vec<usize>,
    /// Indices into the graph's edge list, ascending; `nodes.len() - 1` of
    /// them whenever `nodes` is non-empty.
    pub edges: Vec<usize>,
    pub objective: f64,
}

impl PcstSolution {
    fn empty() -> Self {
        PcstSolution {
            nodes: Vec::new(),
            edges: Vec::new(),
            objective: 0.0,
        }
    }

    /// True when `candidate` should replace `self` under the objective with
    /// lexicographic node-set tie-breaking.
    fn improved_by(&self, candidate: &PcstSolution) -> bool {
        if candidate.objective > self.objective + EPS {
            return true;
        }
        if candidate.objective < self.objective - EPS {
            return false;
        }
        candidate.nodes < self.nodes
    }
}

/// One cluster-growth event, for debugging dumps.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GwEvent {
    Merge {
        time: f64,
        edge: usize,
        cluster_a: usize,
        cluster_b: usize,
    },
    Deactivate { time: f64, cluster: usize },
}

/// Linear prize schedule over a ranked candidate list: the i-th ranked
/// candidate (0-based, for `i < k`) receives prize `k - i`; every other node
/// gets prize 0 (and is simply absent from the map).
pub fn assign_prizes(ranked: &[EntityId], k: usize) -> Result<HashMap<EntityId, f64>> {
    if k == 0 {
        return Err(Error::config("prize count k must be at least 1"));
    }
    let mut seen = std::collections::HashSet::new();
    let mut out = HashMap::new();
    for (i, &entity) in ranked.iter().enumerate() {
        if !seen.insert(entity) {
            return Err(Error::input(format!(
                "ranked candidates contain {entity} twice"
            )));
        }
        if i < k {
            out.insert(entity, (k - i) as f64);
        }
    }
    Ok(out)
}

/// Solves the instance; see module docs for the two modes.
pub fn solve_pcst(graph: &PrizedGraph, mode: SolveMode) -> Result<PcstSolution> {
    match mode {
        SolveMode::Exact => solve_exact(graph),
        SolveMode::Approx => Ok(solve_approx_traced(graph).0),
    }
}

/// Approximate solve that also returns the cluster-growth event log.
pub fn solve_pcst_traced(graph: &PrizedGraph) -> (PcstSolution, Vec<GwEvent>) {
    solve_approx_traced(graph)
}

// -- exact solver ------------------------------------------------------------

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Minimum spanning connection of the node set `mask`, restricted to edges
/// with both endpoints inside. Returns edge indices or None when `mask` is
/// not connectable.
fn spanning_connection(
    graph: &PrizedGraph,
    mask: u32,
    sorted_edges: &[usize],
) -> Option<(f64, Vec<usize>)> {
    let members: Vec<usize> = (0..graph.node_count())
        .filter(|&v| mask & (1 << v) != 0)
        .collect();
    if members.len() <= 1 {
        return Some((0.0, Vec::new()));
    }
    let mut uf = UnionFind::new(graph.node_count());
    let mut cost = 0.0;
    let mut kept = Vec::new();
    for &ei in sorted_edges {
        let e = graph.edges()[ei];
        if mask & (1 << e.a) == 0 || mask & (1 << e.b) == 0 {
            continue;
        }
        if uf.union(e.a, e.b) {
            cost += e.cost;
            kept.push(ei);
            if kept.len() == members.len() - 1 {
                break;
            }
        }
    }
    if kept.len() == members.len() - 1 {
        kept.sort_unstable();
        Some((cost, kept))
    } else {
        None
    }
}

fn solve_exact(graph: &PrizedGraph) -> Result<PcstSolution> {
    let n = graph.node_count();
    if n > EXACT_NODE_GUARD {
        return Err(Error::config(format!(
            "exact mode is guarded at {EXACT_NODE_GUARD} nodes, got {n}"
        )));
    }
    let mut sorted_edges: Vec<usize> = (0..graph.edges().len()).collect();
    sorted_edges.sort_by(|&x, &y| {
        graph.edges()[x]
            .cost
            .partial_cmp(&graph.edges()[y].cost)
            .expect("finite costs")
            .then(x.cmp(&y))
    });

    let mut best = PcstSolution::empty();
    for mask in 1u32..(1u32 << n) {
        let Some((cost, kept)) = spanning_connection(graph, mask, &sorted_edges) else {
            continue;
        };
        let nodes: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
        let prize: f64 = nodes.iter().map(|&v| graph.prize(v)).sum();
        let candidate = PcstSolution {
            nodes,
            edges: kept,
            objective: prize - cost,
        };
        if best.improved_by(&candidate) {
            best = candidate;
        }
    }
    Ok(best)
}

// -- approximate solver --------------------------------------------------------

struct Cluster {
    members: Vec<usize>,
    potential: f64,
    active: bool,
    alive: bool,
}

enum GrowthEvent {
    Deactivate(usize),
    Merge(usize),
    None,
}

fn solve_approx_traced(graph: &PrizedGraph) -> (PcstSolution, Vec<GwEvent>) {
    let n = graph.node_count();
    if n == 0 {
        return (PcstSolution::empty(), Vec::new());
    }

    let mut clusters: Vec<Cluster> = (0..n)
        .map(|v| Cluster {
            members: vec![v],
            potential: graph.prize(v),
            active: graph.prize(v) > EPS,
            alive: true,
        })
        .collect();
    let mut cluster_of: Vec<usize> = (0..n).collect();
    let mut fill: Vec<f64> = vec![0.0; graph.edges().len()];
    let mut forest: Vec<usize> = Vec::new();
    let mut events: Vec<GwEvent> = Vec::new();
    let mut now = 0.0;

    loop {
        if !clusters.iter().any(|c| c.alive && c.active) {
            break;
        }

        // Smallest time step to the next event; deactivations scanned first,
        // then edges in index order, so ties resolve deterministically.
        let mut delta = f64::INFINITY;
        let mut event = GrowthEvent::None;
        for (ci, c) in clusters.iter().enumerate() {
            if c.alive && c.active && c.potential < delta {
                delta = c.potential;
                event = GrowthEvent::Deactivate(ci);
            }
        }
        for (ei, e) in graph.edges().iter().enumerate() {
            let (ca, cb) = (cluster_of[e.a], cluster_of[e.b]);
            if ca == cb {
                continue;
            }
            let sides = usize::from(clusters[ca].active) + usize::from(clusters[cb].active);
            if sides == 0 {
                continue;
            }
            let slack = (e.cost - fill[ei]).max(0.0) / sides as f64;
            if slack < delta - EPS {
                delta = slack;
                event = GrowthEvent::Merge(ei);
            }
        }
        if !delta.is_finite() {
            break;
        }

        now += delta;
        for c in clusters.iter_mut() {
            if c.alive && c.active {
                c.potential -= delta;
            }
        }
        for (ei, e) in graph.edges().iter().enumerate() {
            let (ca, cb) = (cluster_of[e.a], cluster_of[e.b]);
            if ca == cb {
                continue;
            }
            let sides = usize::from(clusters[ca].active) + usize::from(clusters[cb].active);
            fill[ei] += delta * sides as f64;
        }

        match event {
            GrowthEvent::Deactivate(ci) => {
                clusters[ci].active = false;
                clusters[ci].potential = 0.0;
                events.push(GwEvent::Deactivate { time: now, cluster: ci });
            }
            GrowthEvent::Merge(ei) => {
                let e = graph.edges()[ei];
                let (ca, cb) = (cluster_of[e.a], cluster_of[e.b]);
                let (keep, drop) = (ca.min(cb), ca.max(cb));
                let moved = std::mem::take(&mut clusters[drop].members);
                for &v in &moved {
                    cluster_of[v] = keep;
                }
                clusters[keep].members.extend(moved);
                let carried = clusters[drop].potential;
                clusters[drop].alive = false;
                clusters[drop].active = false;
                clusters[drop].potential = 0.0;
                clusters[keep].potential += carried;
                clusters[keep].active = clusters[keep].potential > EPS;
                forest.push(ei);
                events.push(GwEvent::Merge {
                    time: now,
                    edge: ei,
                    cluster_a: keep,
                    cluster_b: drop,
                });
            }
            GrowthEvent::None => break,
        }
    }

    // Strong pruning: per grown component, the best net-worth subtree over
    // every choice of root; then the best component wins overall.
    let mut best = PcstSolution::empty();
    for c in clusters.iter().filter(|c| c.alive) {
        let candidate = best_subtree(graph, &c.members, &forest);
        if best.improved_by(&candidate) {
            best = candidate;
        }
    }
    (best, events)
}

/// Max net-worth connected subtree of the tree induced by `tree_edges` on
/// `members`, considering every node as the subtree's top.
fn best_subtree(graph: &PrizedGraph, members: &[usize], tree_edges: &[usize]) -> PcstSolution {
    let member_set: std::collections::HashSet<usize> = members.iter().copied().collect();
    let mut adj: std::collections::HashMap<usize, Vec<(usize, usize)>> =
        std::collections::HashMap::new();
    for &ei in tree_edges {
        let e = graph.edges()[ei];
        if member_set.contains(&e.a) && member_set.contains(&e.b) {
            adj.entry(e.a).or_default().push((e.b, ei));
            adj.entry(e.b).or_default().push((e.a, ei));
        }
    }

    let mut sorted_members: Vec<usize> = members.to_vec();
    sorted_members.sort_unstable();

    let mut best = PcstSolution::empty();
    for &root in &sorted_members {
        let (value, mut nodes, mut edges) = prune_from(graph, root, usize::MAX, &adj);
        nodes.sort_unstable();
        edges.sort_unstable();
        let candidate = PcstSolution {
            nodes,
            edges,
            objective: value,
        };
        if best.improved_by(&candidate) {
            best = candidate;
        }
    }
    best
}

fn prune_from(
    graph: &PrizedGraph,
    v: usize,
    parent: usize,
    adj: &std::collections::HashMap<usize, Vec<(usize, usize)>>,
) -> (f64, Vec<usize>, Vec<usize>) {
    let mut value = graph.prize(v);
    let mut nodes = vec![v];
    let mut edges = Vec::new();
    for &(child, ei) in adj.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
        if child == parent {
            continue;
        }
        let (child_value, child_nodes, child_edges) = prune_from(graph, child, v, adj);
        let gain = child_value - graph.edges()[ei].cost;
        if gain > EPS {
            value += gain;
            nodes.extend(child_nodes);
            edges.push(ei);
            edges.extend(child_edges);
        }
    }
    (value, nodes, edges)
}
