//! Undirected marked graphs: vertices carry a discrete or continuous mark.
//!
//! By convention the discrete vertices occupy the lowest indices. This keeps
//! dataset columns, model level tables and graph files aligned without a
//! separate permutation.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Vertex mark: discrete or continuous variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Discrete,
    Continuous,
}

/// Cap on rejection-sampling attempts in [`MarkedGraph::sample_dregular`].
/// Pairing-model dead ends and graphs rejected for joining two discrete
/// vertices both count against it.
pub const DREGULAR_ATTEMPT_CAP: usize = 10_000;

/// An immutable undirected marked graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedGraph {
    n_vertices: usize,
    n_discrete: usize,
    edges: BTreeSet<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    adj: Vec<bool>,
}

impl MarkedGraph {
    /// Build a graph on `n_vertices` vertices whose first `n_discrete`
    /// vertices are discrete. Edge pairs are normalized to `u < v`;
    /// duplicates are merged; self-loops and out-of-range endpoints error.
    pub fn new(
        n_vertices: usize,
        n_discrete: usize,
        edge_list: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if n_discrete > n_vertices {
            return Err(Error::Graph(format!(
                "{n_discrete} discrete marks on {n_vertices} vertices"
            )));
        }
        let mut edges = BTreeSet::new();
        for (a, b) in edge_list {
            if a == b {
                return Err(Error::Graph(format!("self-loop at vertex {a}")));
            }
            if a >= n_vertices || b >= n_vertices {
                return Err(Error::Graph(format!(
                    "edge ({a}, {b}) outside vertex range 0..{n_vertices}"
                )));
            }
            edges.insert((a.min(b), a.max(b)));
        }
        let mut neighbors = vec![Vec::new(); n_vertices];
        let mut adj = vec![false; n_vertices * n_vertices];
        for &(u, v) in &edges {
            neighbors[u].push(v);
            neighbors[v].push(u);
            adj[u * n_vertices + v] = true;
            adj[v * n_vertices + u] = true;
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self { n_vertices, n_discrete, edges, neighbors, adj })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_discrete(&self) -> usize {
        self.n_discrete
    }

    pub fn n_continuous(&self) -> usize {
        self.n_vertices - self.n_discrete
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn mark(&self, v: usize) -> Mark {
        if v < self.n_discrete {
            Mark::Discrete
        } else {
            Mark::Continuous
        }
    }

    pub fn is_discrete(&self, v: usize) -> bool {
        v < self.n_discrete
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.n_vertices + v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    /// Edges in lexicographic order, `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// |E| / (p (p-1) / 2). Zero for graphs with fewer than two vertices.
    pub fn density(&self) -> f64 {
        if self.n_vertices < 2 {
            return 0.0;
        }
        let total = self.n_vertices * (self.n_vertices - 1) / 2;
        self.edges.len() as f64 / total as f64
    }

    /// Sample a simple d-regular marked graph uniformly at random with the
    /// pairing model, rejecting any graph that joins two discrete vertices.
    ///
    /// Dead-ended pairings (only self-loops or multi-edges left to match) and
    /// discrete-discrete rejections both restart and count against
    /// [`DREGULAR_ATTEMPT_CAP`]. Identical inputs give an identical graph.
    pub fn sample_dregular(p: usize, d: usize, n_discrete: usize, seed: u64) -> Result<Self> {
        if d >= p || !(p * d).is_multiple_of(2) {
            return Err(Error::InfeasibleDegree { p, d });
        }
        if n_discrete > p {
            return Err(Error::Graph(format!("{n_discrete} discrete marks on {p} vertices")));
        }
        let mut rng = rng_from_seed(seed);
        for _ in 0..DREGULAR_ATTEMPT_CAP {
            let Some(edges) = pairing_attempt(p, d, &mut rng) else {
                continue;
            };
            let discrete_pair = edges.iter().any(|&(u, v)| u < n_discrete && v < n_discrete);
            if discrete_pair {
                continue;
            }
            return Self::new(p, n_discrete, edges);
        }
        Err(Error::RetryExhausted { attempts: DREGULAR_ATTEMPT_CAP })
    }

    /// Decomposability of a marked graph: chordal, and no two non-adjacent
    /// discrete vertices are joined by a path through continuous vertices
    /// only.
    pub fn is_decomposable(&self) -> bool {
        self.is_chordal() && !self.has_continuous_path_between_discrete()
    }

    // Maximum cardinality search plus the perfect-elimination check of
    // Tarjan & Yannakakis.
    fn is_chordal(&self) -> bool {
        let n = self.n_vertices;
        if n == 0 {
            return true;
        }
        let mut weight = vec![0usize; n];
        let mut position = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        for step in 0..n {
            let v = (0..n)
                .filter(|&v| position[v] == usize::MAX)
                .max_by_key(|&v| (weight[v], std::cmp::Reverse(v)))
                .expect("unnumbered vertex exists");
            position[v] = step;
            order.push(v);
            for &u in &self.neighbors[v] {
                if position[u] == usize::MAX {
                    weight[u] += 1;
                }
            }
        }
        // For each vertex, its earlier-numbered neighbors minus the latest
        // of them must all be adjacent to that latest one.
        for (pos, &v) in order.iter().enumerate() {
            let mut earlier: Vec<usize> = self.neighbors[v]
                .iter()
                .copied()
                .filter(|&u| position[u] < pos)
                .collect();
            if earlier.len() < 2 {
                continue;
            }
            earlier.sort_unstable_by_key(|&u| position[u]);
            let pivot = *earlier.last().unwrap();
            for &u in &earlier[..earlier.len() - 1] {
                if !self.has_edge(u, pivot) {
                    return false;
                }
            }
        }
        true
    }

    fn has_continuous_path_between_discrete(&self) -> bool {
        for d1 in 0..self.n_discrete {
            for d2 in (d1 + 1)..self.n_discrete {
                if self.has_edge(d1, d2) {
                    continue;
                }
                // BFS from d1 through continuous vertices only.
                let mut visited = vec![false; self.n_vertices];
                let mut queue: Vec<usize> = self.neighbors[d1]
                    .iter()
                    .copied()
                    .filter(|&u| !self.is_discrete(u))
                    .collect();
                for &u in &queue {
                    visited[u] = true;
                }
                while let Some(u) = queue.pop() {
                    if self.has_edge(u, d2) {
                        return true;
                    }
                    for &w in &self.neighbors[u] {
                        if !self.is_discrete(w) && !visited[w] {
                            visited[w] = true;
                            queue.push(w);
                        }
                    }
                }
            }
        }
        false
    }

    /// Serialize as the plain-text edge list: `p <n_vertices> <n_discrete>`
    /// followed by one `u v` line per edge, `u < v`, lexicographic order.
    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p {} {}", self.n_vertices, self.n_discrete);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn save_edge_list(&self, path: &Path) -> Result<()> {
        crate::io_util::atomic_write(path, self.to_edge_list_string().as_bytes())
    }

    pub fn parse_edge_list(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            path: origin.to_string(),
            line: 1,
            msg: "empty graph file".to_string(),
        })?;
        let mut fields = header.split_whitespace();
        let parse_err = |line: usize, msg: &str| Error::Parse {
            path: origin.to_string(),
            line,
            msg: msg.to_string(),
        };
        if fields.next() != Some("p") {
            return Err(parse_err(1, "expected header `p <n_vertices> <n_discrete>`"));
        }
        let n_vertices: usize = fields
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(1, "bad vertex count"))?;
        let n_discrete: usize = fields
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(1, "bad discrete count"))?;
        let mut edges = Vec::new();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let u: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| parse_err(idx + 1, "bad edge endpoint"))?;
            let v: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| parse_err(idx + 1, "bad edge endpoint"))?;
            if it.next().is_some() {
                return Err(parse_err(idx + 1, "trailing tokens on edge line"));
            }
            edges.push((u, v));
        }
        Self::new(n_vertices, n_discrete, edges)
    }

    pub fn load_edge_list(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_edge_list(&text, &path.display().to_string())
    }
}

// One pass of the pairing model: d stubs per vertex, repeatedly match two
// stubs that form a fresh simple edge. Returns None on a dead end.
fn pairing_attempt(p: usize, d: usize, rng: &mut impl Rng) -> Option<Vec<(usize, usize)>> {
    let mut stubs: Vec<usize> = (0..p).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut present = vec![false; p * p];
    let mut edges = Vec::with_capacity(p * d / 2);
    while !stubs.is_empty() {
        let mut matched = false;
        // Draw random stub pairs; almost always a few draws suffice.
        for _ in 0..64 {
            let i = rng.random_range(0..stubs.len());
            let j = rng.random_range(0..stubs.len());
            if i == j {
                continue;
            }
            let (u, v) = (stubs[i], stubs[j]);
            if u != v && !present[u * p + v] {
                present[u * p + v] = true;
                present[v * p + u] = true;
                edges.push((u.min(v), u.max(v)));
                let (hi, lo) = (i.max(j), i.min(j));
                stubs.swap_remove(hi);
                stubs.swap_remove(lo);
                matched = true;
                break;
            }
        }
        if matched {
            continue;
        }
        // Rare: enumerate the remaining suitable stub pairs and pick one
        // uniformly, which matches the draw-until-suitable distribution.
        let mut suitable = Vec::new();
        for i in 0..stubs.len() {
            for j in (i + 1)..stubs.len() {
                let (u, v) = (stubs[i], stubs[j]);
                if u != v && !present[u * p + v] {
                    suitable.push((i, j));
                }
            }
        }
        if suitable.is_empty() {
            return None; // dead end, restart the attempt
        }
        let (i, j) = suitable[rng.random_range(0..suitable.len())];
        let (u, v) = (stubs[i], stubs[j]);
        present[u * p + v] = true;
        present[v * p + u] = true;
        edges.push((u.min(v), u.max(v)));
        stubs.swap_remove(j);
        stubs.swap_remove(i);
    }
    Some(edges)
}
