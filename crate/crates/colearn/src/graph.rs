//! Undirected graphs, generators, structural checks, and the
//! Metropolis-Hastings transition kernel.
//!
//! Agent ids are 1-based throughout. A [`Graph`] is structurally valid
//! (symmetric, simple, minimum degree 1); connectivity and non-bipartiteness
//! are required by the protocol and are guaranteed by
//! [`Graph::generate_random`] (via deterministic repair) and enforced by
//! [`Graph::load`], while [`Graph::is_connected`] / [`Graph::is_bipartite`]
//! let callers check arbitrary instances.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// 1-based agent identifier.
pub type AgentId = u32;

/// Undirected simple graph on agents `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: u32,
    /// `adjacency[i - 1]` holds the sorted neighbor ids of agent `i`.
    adjacency: Vec<Vec<AgentId>>,
}

impl Graph {
    /// Builds a graph from an undirected edge list.
    ///
    /// Rejects out-of-range ids, self-loops, duplicate edges (in either
    /// orientation), and isolated agents. Does not require connectivity or
    /// non-bipartiteness, so checker operations can be exercised on arbitrary
    /// instances.
    pub fn from_edges(n: u32, edges: &[(AgentId, AgentId)]) -> Result<Graph> {
        if n < 1 {
            return Err(Error::Parameter("graph needs at least one agent".into()));
        }
        let mut adjacency = vec![Vec::new(); n as usize];
        for &(i, j) in edges {
            if i < 1 || i > n || j < 1 || j > n {
                return Err(Error::Parameter(format!(
                    "edge ({i},{j}) references an agent outside 1..={n}"
                )));
            }
            if i == j {
                return Err(Error::Parameter(format!("self-loop at agent {i}")));
            }
            adjacency[(i - 1) as usize].push(j);
            adjacency[(j - 1) as usize].push(i);
        }
        for (idx, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if nbrs.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Parameter(format!(
                    "duplicate edge at agent {}",
                    idx + 1
                )));
            }
            if nbrs.is_empty() {
                return Err(Error::Parameter(format!("agent {} is isolated", idx + 1)));
            }
        }
        Ok(Graph { n, adjacency })
    }

    /// Samples an Erdős–Rényi graph and deterministically repairs it to be
    /// connected and non-bipartite.
    ///
    /// Repair first chains the lowest-id representatives of the components,
    /// then, if the result is bipartite, adds one chord between the two
    /// lowest-id same-color agents to create an odd cycle. Identical inputs
    /// yield byte-identical adjacency.
    pub fn generate_random(n: u32, edge_probability: f64, seed: u64) -> Result<Graph> {
        if n < 3 {
            return Err(Error::Parameter(format!(
                "need n >= 3 for a connected non-bipartite graph, got {n}"
            )));
        }
        if !(edge_probability > 0.0 && edge_probability <= 1.0) {
            return Err(Error::Parameter(format!(
                "edge probability must be in (0,1], got {edge_probability}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut adjacency = vec![Vec::new(); n as usize];
        for i in 1..=n {
            for j in (i + 1)..=n {
                if rng.gen::<f64>() < edge_probability {
                    adjacency[(i - 1) as usize].push(j);
                    adjacency[(j - 1) as usize].push(i);
                }
            }
        }
        let mut g = Graph { n, adjacency };
        g.repair_connectivity();
        g.repair_bipartiteness();
        for nbrs in &mut g.adjacency {
            nbrs.sort_unstable();
        }
        debug_assert!(g.is_connected() && !g.is_bipartite());
        Ok(g)
    }

    /// Number of agents.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sorted neighbors of `agent`.
    pub fn neighbors(&self, agent: AgentId) -> &[AgentId] {
        &self.adjacency[(agent - 1) as usize]
    }

    /// Degree of `agent`.
    pub fn degree(&self, agent: AgentId) -> u32 {
        self.adjacency[(agent - 1) as usize].len() as u32
    }

    /// True iff a traversal from agent 1 reaches all `n` agents.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n as usize];
        let mut stack = vec![1u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in self.neighbors(u) {
                let vi = (v - 1) as usize;
                if !seen[vi] {
                    seen[vi] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    /// True iff a valid 2-coloring exists (every component is checked).
    pub fn is_bipartite(&self) -> bool {
        self.two_color().is_some()
    }

    /// BFS 2-coloring over all components; `None` if an odd cycle exists.
    fn two_color(&self) -> Option<Vec<u8>> {
        let n = self.n as usize;
        let mut color = vec![u8::MAX; n];
        for start in 0..n {
            if color[start] != u8::MAX {
                continue;
            }
            color[start] = 0;
            let mut queue = std::collections::VecDeque::from([start as u32 + 1]);
            while let Some(u) = queue.pop_front() {
                let cu = color[(u - 1) as usize];
                for &v in self.neighbors(u) {
                    let vi = (v - 1) as usize;
                    if color[vi] == u8::MAX {
                        color[vi] = 1 - cu;
                        queue.push_back(v);
                    } else if color[vi] == cu {
                        return None;
                    }
                }
            }
        }
        Some(color)
    }

    /// Lowest-id agent of each component, in id order.
    fn component_representatives(&self) -> Vec<AgentId> {
        let n = self.n as usize;
        let mut seen = vec![false; n];
        let mut reps = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            reps.push(start as u32 + 1);
            seen[start] = true;
            let mut stack = vec![start as u32 + 1];
            while let Some(u) = stack.pop() {
                for &v in self.neighbors(u) {
                    let vi = (v - 1) as usize;
                    if !seen[vi] {
                        seen[vi] = true;
                        stack.push(v);
                    }
                }
            }
        }
        reps
    }

    fn add_edge(&mut self, i: AgentId, j: AgentId) {
        self.adjacency[(i - 1) as usize].push(j);
        self.adjacency[(j - 1) as usize].push(i);
    }

    fn repair_connectivity(&mut self) {
        let reps = self.component_representatives();
        for pair in reps.windows(2) {
            self.add_edge(pair[0], pair[1]);
        }
    }

    fn repair_bipartiteness(&mut self) {
        let Some(color) = self.two_color() else {
            return;
        };
        // Lexicographically smallest same-color pair; a chord inside a color
        // class of a connected bipartite graph closes an odd cycle.
        let mut best: Option<(AgentId, AgentId)> = None;
        for c in [0u8, 1u8] {
            let mut ids = (1..=self.n).filter(|&i| color[(i - 1) as usize] == c);
            if let (Some(a), Some(b)) = (ids.next(), ids.next()) {
                if best.is_none_or(|p| (a, b) < p) {
                    best = Some((a, b));
                }
            }
        }
        let (a, b) = best.expect("a graph with n >= 3 has a color class of size >= 2");
        self.add_edge(a, b);
    }

    /// Loads the plain-text format: first line `n m`, then `m` lines `i j`
    /// with `i < j`. Enforces every invariant including connectivity and
    /// non-bipartiteness.
    pub fn load(path: &Path) -> Result<Graph> {
        let file = std::fs::File::open(path)?;
        let display = path.display().to_string();
        let ingest = |line: usize, msg: String| Error::Ingestion {
            path: display.clone(),
            line,
            msg,
        };
        let mut lines = std::io::BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| ingest(1, "empty file".into()))??;
        let mut it = header.split_whitespace();
        let n: u32 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| ingest(1, "expected header \"n m\"".into()))?;
        let m: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| ingest(1, "expected header \"n m\"".into()))?;
        if it.next().is_some() {
            return Err(ingest(1, "expected header \"n m\"".into()));
        }
        let mut edges = Vec::with_capacity(m);
        for (idx, line) in lines.enumerate() {
            let lineno = idx + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |t: Option<&str>| -> Result<u32> {
                t.and_then(|t| t.parse().ok())
                    .ok_or_else(|| ingest(lineno, format!("expected edge \"i j\", got {line:?}")))
            };
            let i = parse(it.next())?;
            let j = parse(it.next())?;
            if it.next().is_some() {
                return Err(ingest(lineno, format!("expected edge \"i j\", got {line:?}")));
            }
            if i >= j {
                return Err(ingest(lineno, format!("edges must satisfy i < j, got {i} {j}")));
            }
            edges.push((i, j));
        }
        if edges.len() != m {
            return Err(ingest(
                1,
                format!("header declares {m} edges but the file has {}", edges.len()),
            ));
        }
        let g = Graph::from_edges(n, &edges).map_err(|e| ingest(1, e.to_string()))?;
        if !g.is_connected() {
            return Err(ingest(1, "graph is not connected".into()));
        }
        if g.is_bipartite() {
            return Err(ingest(1, "graph is bipartite (no odd cycle)".into()));
        }
        Ok(g)
    }

    /// Writes the plain-text format read by [`Graph::load`].
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "{} {}", self.n, self.edge_count())?;
        for i in 1..=self.n {
            for &j in self.neighbors(i) {
                if i < j {
                    writeln!(out, "{i} {j}")?;
                }
            }
        }
        Ok(())
    }
}

/// Metropolis-Hastings transition kernel of a graph.
///
/// `psi(i, j) = min(1/d_i, 1/d_j)` for neighbors, with the self-loop holding
/// the residual mass. Rows are stochastic, the kernel is symmetric on edges,
/// and the uniform distribution is stationary.
#[derive(Debug, Clone)]
pub struct TransitionKernel {
    /// 0-based neighbor indices, aligned with `probs`/`cum`.
    neighbors: Vec<Vec<u32>>,
    probs: Vec<Vec<f64>>,
    /// Per-row cumulative sums over neighbors (self-loop is the remainder),
    /// so a destination draw is one uniform and a binary search.
    cum: Vec<Vec<f64>>,
    self_prob: Vec<f64>,
    degrees: Vec<u32>,
}

impl TransitionKernel {
    /// Builds the kernel for `g`. The self-loop residual is computed as
    /// `1 - sum(neighbor probabilities)` and clamped to zero only when the
    /// negative excess is within 1e-12.
    pub fn build(g: &Graph) -> TransitionKernel {
        let n = g.n() as usize;
        let mut neighbors = Vec::with_capacity(n);
        let mut probs = Vec::with_capacity(n);
        let mut cum = Vec::with_capacity(n);
        let mut self_prob = Vec::with_capacity(n);
        let mut degrees = Vec::with_capacity(n);
        for i in 1..=g.n() {
            let di = g.degree(i) as f64;
            let row_nbrs: Vec<u32> = g.neighbors(i).iter().map(|&j| j - 1).collect();
            let row_probs: Vec<f64> = g
                .neighbors(i)
                .iter()
                .map(|&j| (1.0 / di).min(1.0 / g.degree(j) as f64))
                .collect();
            let mut acc = 0.0;
            let row_cum: Vec<f64> = row_probs
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect();
            let residual = 1.0 - acc;
            debug_assert!(residual >= -1e-12, "row mass exceeds 1 beyond tolerance");
            self_prob.push(residual.max(0.0));
            neighbors.push(row_nbrs);
            probs.push(row_probs);
            cum.push(row_cum);
            degrees.push(g.degree(i));
        }
        TransitionKernel {
            neighbors,
            probs,
            cum,
            self_prob,
            degrees,
        }
    }

    /// Number of agents.
    pub fn n(&self) -> u32 {
        self.neighbors.len() as u32
    }

    /// `psi(i, j)` for 1-based agents; zero for non-adjacent distinct pairs.
    pub fn psi(&self, i: AgentId, j: AgentId) -> f64 {
        let row = (i - 1) as usize;
        if i == j {
            return self.self_prob[row];
        }
        match self.neighbors[row].binary_search(&(j - 1)) {
            Ok(pos) => self.probs[row][pos],
            Err(_) => 0.0,
        }
    }

    /// Self-loop mass of agent `i`.
    pub fn self_loop(&self, i: AgentId) -> f64 {
        self.self_prob[(i - 1) as usize]
    }

    /// Draws a destination (0-based index) for a token held by the 0-based
    /// agent `row`, in `O(log d)` via the cumulative row.
    #[inline]
    pub fn sample_destination(&self, row: usize, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen();
        let cum = &self.cum[row];
        let pos = cum.partition_point(|&c| c <= u);
        if pos < cum.len() {
            self.neighbors[row][pos] as usize
        } else {
            row
        }
    }

    /// One exact step of the distribution `pi` under the kernel.
    pub fn step_distribution(&self, pi: &[f64]) -> Vec<f64> {
        let mut next = vec![0.0; pi.len()];
        for (row, &mass) in pi.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (nbr, p) in self.neighbors[row].iter().zip(&self.probs[row]) {
                next[*nbr as usize] += mass * p;
            }
            next[row] += mass * self.self_prob[row];
        }
        next
    }

    /// Degree of the 1-based agent `i` in the underlying graph.
    pub fn degree(&self, i: AgentId) -> u32 {
        self.degrees[(i - 1) as usize]
    }

    /// Worst absolute row-sum deviation from 1.
    pub fn max_row_sum_error(&self) -> f64 {
        (0..self.neighbors.len())
            .map(|row| {
                let s: f64 = self.probs[row].iter().sum::<f64>() + self.self_prob[row];
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}
