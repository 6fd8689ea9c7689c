//! Cosine-normalized word co-occurrence networks, Louvain community
//! detection, and graph/two-mode exports.

use std::collections::BTreeMap;
use std::path::Path;

use crate::corpus::{write_file, DocTermMatrix};
use crate::error::{Error, Result};
use crate::scalar::{from_f64, from_i64, Real};
use crate::topics::WordAssignment;

/// Weighted undirected word graph. Nodes are vocabulary indices; edges carry
/// cosine weights in (0, 1] and are stored once with `a < b`.
#[derive(Debug, Clone, PartialEq)]
pub struct WordGraph<T> {
    pub n_nodes: usize,
    /// `(a, b, weight)` with `a < b`, sorted by `(a, b)`.
    pub edges: Vec<(u32, u32, T)>,
}

impl<T: Real> WordGraph<T> {
    /// Sum of edge weights m.
    pub fn total_weight(&self) -> T {
        self.edges.iter().map(|&(_, _, w)| w).sum()
    }

    /// Weighted degree per node.
    pub fn degrees(&self) -> Vec<T> {
        let mut deg = vec![T::zero(); self.n_nodes];
        for &(a, b, w) in &self.edges {
            deg[a as usize] = deg[a as usize] + w;
            deg[b as usize] = deg[b as usize] + w;
        }
        deg
    }

    /// Adjacency lists (both directions), neighbor-sorted.
    pub fn adjacency(&self) -> Vec<Vec<(u32, T)>> {
        let mut adj = vec![Vec::new(); self.n_nodes];
        for &(a, b, w) in &self.edges {
            adj[a as usize].push((b, w));
            adj[b as usize].push((a, w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(n, _)| n);
        }
        adj
    }
}

/// A community assignment with its modularity.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition<T> {
    /// Community id per node; ids are contiguous from 0.
    pub membership: Vec<u32>,
    /// Modularity of the partition.
    pub q: T,
    /// Modularity after each aggregation pass (non-decreasing).
    pub pass_modularity: Vec<T>,
}

impl<T> Partition<T> {
    pub fn n_communities(&self) -> usize {
        self.membership.iter().map(|&c| c as usize + 1).max().unwrap_or(0)
    }
}

/// Build the cosine graph over word columns. Edges with weight <= threshold
/// are omitted; the default threshold 0 keeps every positive cosine.
pub fn cosine_matrix<T: Real>(matrix: &DocTermMatrix, threshold: T) -> WordGraph<T> {
    let v = matrix.n_words;
    let gram = matrix.column_gram();
    let norms: Vec<T> = (0..v).map(|j| from_i64::<T>(gram.dot(j, j)).sqrt()).collect();
    let mut edges = Vec::new();
    for a in 0..v {
        if norms[a] == T::zero() {
            continue;
        }
        for b in (a + 1)..v {
            let dot = gram.dot(a, b);
            if dot == 0 || norms[b] == T::zero() {
                continue;
            }
            let cos = (from_i64::<T>(dot) / (norms[a] * norms[b])).min(T::one());
            if cos > threshold {
                edges.push((a as u32, b as u32, cos));
            }
        }
    }
    WordGraph { n_nodes: v, edges }
}

/// Weighted Newman modularity: Q = sum_c (e_c/m - (d_c/2m)^2), with m the
/// total edge weight, e_c the intra-community weight, and d_c the community
/// degree sum. An edgeless graph has Q = 0 by convention.
pub fn modularity<T: Real>(graph: &WordGraph<T>, membership: &[u32]) -> Result<T> {
    if membership.len() != graph.n_nodes {
        return Err(Error::input(format!(
            "membership covers {} nodes but the graph has {}",
            membership.len(),
            graph.n_nodes
        )));
    }
    let m = graph.total_weight();
    if m <= T::zero() {
        return Ok(T::zero());
    }
    let n_comm = membership.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut intra = vec![T::zero(); n_comm];
    let mut degree = vec![T::zero(); n_comm];
    for &(a, b, w) in &graph.edges {
        let (ca, cb) = (membership[a as usize] as usize, membership[b as usize] as usize);
        if ca == cb {
            intra[ca] = intra[ca] + w;
        }
        degree[ca] = degree[ca] + w;
        degree[cb] = degree[cb] + w;
    }
    let two_m = m + m;
    let mut q = T::zero();
    for c in 0..n_comm {
        let frac = degree[c] / two_m;
        q = q + intra[c] / m - frac * frac;
    }
    Ok(q)
}

const LOUVAIN_MIN_GAIN: f64 = 1e-9;

/// Modularity with a resolution multiplier on the null-model term. The
/// classic value is resolution = 1.
fn generalized_modularity<T: Real>(graph: &WordGraph<T>, membership: &[u32], resolution: T) -> T {
    let m = graph.total_weight();
    if m <= T::zero() {
        return T::zero();
    }
    let n_comm = membership.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut intra = vec![T::zero(); n_comm];
    let mut degree = vec![T::zero(); n_comm];
    for &(a, b, w) in &graph.edges {
        let (ca, cb) = (membership[a as usize] as usize, membership[b as usize] as usize);
        if ca == cb {
            intra[ca] = intra[ca] + w;
        }
        degree[ca] = degree[ca] + w;
        degree[cb] = degree[cb] + w;
    }
    let two_m = m + m;
    let mut q = T::zero();
    for c in 0..n_comm {
        let frac = degree[c] / two_m;
        q = q + intra[c] / m - resolution * frac * frac;
    }
    q
}

/// Two-phase Louvain on the weighted graph. Local moves visit nodes in
/// ascending index order; aggregation repeats until the modularity gain of a
/// pass drops below 1e-9. Deterministic for a fixed graph. The reported `q`
/// is always the classic (resolution 1) modularity of the final partition.
pub fn louvain<T: Real>(graph: &WordGraph<T>, resolution: T) -> Partition<T> {
    let min_gain = from_f64::<T>(LOUVAIN_MIN_GAIN);

    // Working copy at the current aggregation level.
    let mut level_edges: Vec<(u32, u32, T)> = graph.edges.clone();
    let mut level_nodes = graph.n_nodes;
    // Map original node -> current level node.
    let mut node_of: Vec<usize> = (0..graph.n_nodes).collect();
    let mut pass_modularity = Vec::new();

    let mut membership: Vec<u32> = (0..graph.n_nodes as u32).collect();
    let mut current_score = generalized_modularity(graph, &membership, resolution);

    loop {
        let level = LevelGraph::build(level_nodes, &level_edges);
        let local = level.local_moves(resolution);

        // Project the level communities down to the original nodes.
        let candidate_raw: Vec<u32> = node_of.iter().map(|&n| local[n] as u32).collect();
        let candidate = renumber(&candidate_raw);
        let score = generalized_modularity(graph, &candidate, resolution);
        pass_modularity.push(score);

        if score - current_score < min_gain {
            if score > current_score {
                membership = candidate;
            }
            break;
        }
        let communities = candidate.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        current_score = score;
        membership = candidate;
        if communities == level_nodes {
            break;
        }

        // Aggregate communities into the next level's nodes.
        let compact = renumber(&local.iter().map(|&c| c as u32).collect::<Vec<_>>());
        let mut merged: BTreeMap<(u32, u32), T> = BTreeMap::new();
        let mut self_loops: BTreeMap<u32, T> = BTreeMap::new();
        for &(a, b, w) in &level_edges {
            let (mut ca, mut cb) = (compact[a as usize], compact[b as usize]);
            if ca == cb {
                // Intra-community weight becomes a self-loop.
                let entry = self_loops.entry(ca).or_insert_with(T::zero);
                *entry = *entry + w;
                continue;
            }
            if ca > cb {
                std::mem::swap(&mut ca, &mut cb);
            }
            let entry = merged.entry((ca, cb)).or_insert_with(T::zero);
            *entry = *entry + w;
        }
        level_nodes = compact.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        level_edges = merged.into_iter().map(|((a, b), w)| (a, b, w)).collect();
        for (c, w) in self_loops {
            level_edges.push((c, c, w));
        }
        level_edges.sort_by_key(|&(a, b, _)| (a, b));
        node_of = node_of.iter().map(|&n| compact[n] as usize).collect();
    }

    let q = modularity(graph, &membership).expect("membership covers all nodes");
    Partition {
        membership,
        q,
        pass_modularity,
    }
}

/// Adjacency view of one aggregation level, self-loops included.
struct LevelGraph<T> {
    n: usize,
    adj: Vec<Vec<(usize, T)>>,
    /// Weighted degree including twice the self-loop.
    degree: Vec<T>,
    /// Total edge weight m (self-loops counted once).
    m: T,
}

impl<T: Real> LevelGraph<T> {
    fn build(n: usize, edges: &[(u32, u32, T)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        let mut degree = vec![T::zero(); n];
        let mut m = T::zero();
        for &(a, b, w) in edges {
            let (a, b) = (a as usize, b as usize);
            m = m + w;
            if a == b {
                // Self-loop weight travels with the node and cancels in
                // gain comparisons; only the degree sees it.
                degree[a] = degree[a] + w + w;
            } else {
                adj[a].push((b, w));
                adj[b].push((a, w));
                degree[a] = degree[a] + w;
                degree[b] = degree[b] + w;
            }
        }
        LevelGraph { n, adj, degree, m }
    }

    /// Greedy local-move phase; returns the community per node.
    fn local_moves(&self, resolution: T) -> Vec<usize> {
        let mut community: Vec<usize> = (0..self.n).collect();
        let mut comm_degree: Vec<T> = self.degree.clone();
        if self.m <= T::zero() {
            return community;
        }
        let two_m = self.m + self.m;
        let inv_m = T::one() / self.m;
        let inv_two_m_sq = T::one() / (two_m * two_m);

        loop {
            let mut moved = false;
            for node in 0..self.n {
                let current = community[node];
                let k_i = self.degree[node];

                // Weight from node to each neighboring community.
                let mut to_comm: BTreeMap<usize, T> = BTreeMap::new();
                for &(nb, w) in &self.adj[node] {
                    let c = community[nb];
                    let entry = to_comm.entry(c).or_insert_with(T::zero);
                    *entry = *entry + w;
                }
                to_comm.entry(current).or_insert_with(T::zero);

                comm_degree[current] = comm_degree[current] - k_i;

                let gain_of = |k_i_c: T, comm_deg: T| -> T {
                    k_i_c * inv_m - (resolution + resolution) * comm_deg * k_i * inv_two_m_sq
                };

                let mut best_comm = current;
                let mut best_gain = gain_of(
                    to_comm.get(&current).copied().unwrap_or_else(T::zero),
                    comm_degree[current],
                );
                for (&c, &k_i_c) in &to_comm {
                    if c == current {
                        continue;
                    }
                    let gain = gain_of(k_i_c, comm_degree[c]);
                    if gain > best_gain {
                        best_gain = gain;
                        best_comm = c;
                    }
                }

                comm_degree[best_comm] = comm_degree[best_comm] + k_i;
                if best_comm != current {
                    community[node] = best_comm;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
        community
    }
}

/// Renumber community labels to contiguous ids in order of first appearance
/// by node index.
fn renumber(labels: &[u32]) -> Vec<u32> {
    let mut map: BTreeMap<u32, u32> = BTreeMap::new();
    let mut next = 0u32;
    let mut out = Vec::with_capacity(labels.len());
    for &label in labels {
        let id = *map.entry(label).or_insert_with(|| {
            let id = next;
            next += 1;
            id
        });
        out.push(id);
    }
    out
}

/// Write the graph in NET format: a `*Vertices` section with quoted labels
/// and an `*Edges` section with 1-based endpoints and weights. When a
/// partition is given, a `word,community` CSV is written next to it.
pub fn export_graph<T: Real>(
    graph: &WordGraph<T>,
    labels: &[String],
    partition: Option<&Partition<T>>,
    path: &Path,
) -> Result<()> {
    let mut out = format!("*Vertices {}\n", graph.n_nodes);
    for (i, label) in labels.iter().enumerate().take(graph.n_nodes) {
        out.push_str(&format!("{} \"{}\"\n", i + 1, label));
    }
    out.push_str("*Edges\n");
    for &(a, b, w) in &graph.edges {
        out.push_str(&format!("{} {} {}\n", a + 1, b + 1, w));
    }
    write_file(path, out.as_bytes())?;

    if let Some(partition) = partition {
        let csv_path = path.with_extension("communities.csv");
        let mut csv = String::from("word,community\n");
        for (i, label) in labels.iter().enumerate().take(graph.n_nodes) {
            csv.push_str(&format!("{label},{}\n", partition.membership[i]));
        }
        write_file(&csv_path, csv.as_bytes())?;
    }
    Ok(())
}

/// Parse a NET file written by [`export_graph`].
pub fn parse_net(body: &str) -> Result<(WordGraph<f64>, Vec<String>)> {
    let mut lines = body.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::input("empty graph file"))?;
    let n_nodes: usize = header
        .strip_prefix("*Vertices ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::input("missing *Vertices header"))?;
    let mut labels = Vec::with_capacity(n_nodes);
    for line in lines.by_ref() {
        if line.starts_with("*Edges") {
            break;
        }
        let quoted = line
            .split_once('"')
            .and_then(|(_, rest)| rest.rsplit_once('"'))
            .map(|(label, _)| label)
            .ok_or_else(|| Error::input(format!("malformed vertex line: {line}")))?;
        labels.push(quoted.to_string());
    }
    let mut edges = Vec::new();
    for line in lines {
        let mut parts = line.split_whitespace();
        let a: u32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::input(format!("malformed edge line: {line}")))?;
        let b: u32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::input(format!("malformed edge line: {line}")))?;
        let w: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::input(format!("malformed edge line: {line}")))?;
        edges.push((a - 1, b - 1, w));
    }
    Ok((WordGraph { n_nodes, edges }, labels))
}

/// Write a `word,cluster,weight` two-mode table for external map tools.
/// `assignment` and `weights` must cover the same words.
pub fn two_mode_export<T: Real>(
    assignment: &WordAssignment,
    weights: &BTreeMap<String, T>,
    path: &Path,
) -> Result<()> {
    if assignment.len() != weights.len()
        || !assignment.keys().all(|word| weights.contains_key(word))
    {
        return Err(Error::input(
            "assignment and weights cover different word sets",
        ));
    }
    let mut out = String::from("word,cluster,weight\n");
    for (word, &cluster) in assignment {
        out.push_str(&format!("{word},{cluster},{}\n", weights[word]));
    }
    write_file(path, out.as_bytes())
}
