//! Simple undirected graphs, the edge-list text format, and the handful of
//! predicates the rest of the crate builds on.
//!
//! A [`Graph`] keeps both a dense adjacency matrix (constant-time edge tests
//! in the consistency filter) and sorted adjacency lists (neighbourhood
//! iteration). Values are immutable once built.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::permgroup::Permutation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
}

/// Edge-list parse failure; `line` is 1-based.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

/// A sorted, duplicate-free set of vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    /// Builds a set from arbitrary ids, sorting and removing duplicates.
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        VertexSet(members)
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VertexSet::new(iter.into_iter().collect())
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    matrix: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
    edge_count: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges())
            .finish()
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            matrix: vec![false; n * n],
            neighbors: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds a graph from an undirected edge list, rejecting self-loops,
    /// out-of-range endpoints and repeated edges (in either orientation).
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            g.insert_edge(u, v)?;
        }
        g.finish();
        Ok(g)
    }

    /// Builds a graph from a predicate evaluated once per unordered pair `u < v`.
    pub fn from_fn(n: usize, mut adjacent: impl FnMut(usize, usize) -> bool) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                if adjacent(u, v) {
                    g.set(u, v);
                }
            }
        }
        g.finish();
        g
    }

    fn insert_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        for x in [u, v] {
            if x >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: x, n: self.n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if self.matrix[u * self.n + v] {
            return Err(GraphError::DuplicateEdge(u, v));
        }
        self.set(u, v);
        Ok(())
    }

    fn set(&mut self, u: usize, v: usize) {
        self.matrix[u * self.n + v] = true;
        self.matrix[v * self.n + u] = true;
        self.neighbors[u].push(v);
        self.neighbors[v].push(u);
        self.edge_count += 1;
    }

    fn finish(&mut self) {
        for list in &mut self.neighbors {
            list.sort_unstable();
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Edge test. Panics if either endpoint is out of range.
    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        assert!(u < self.n && v < self.n, "vertex out of range");
        self.matrix[u * self.n + v]
    }

    /// Sorted neighbour list of `v`. Panics if `v` is out of range.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    /// Degree sequence sorted ascending.
    pub fn degree_multiset(&self) -> Vec<usize> {
        let mut d = self.degrees();
        d.sort_unstable();
        d
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for u in 0..self.n {
            for &v in &self.neighbors[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.n {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { vertex: v, n: self.n })
        }
    }

    pub fn open_neighborhood(&self, v: usize) -> Result<VertexSet, GraphError> {
        self.check_vertex(v)?;
        Ok(VertexSet(self.neighbors[v].clone()))
    }

    pub fn closed_neighborhood(&self, v: usize) -> Result<VertexSet, GraphError> {
        self.check_vertex(v)?;
        let mut members = self.neighbors[v].clone();
        let at = members.partition_point(|&u| u < v);
        members.insert(at, v);
        Ok(VertexSet(members))
    }

    /// Subgraph induced by `s`, relabelled so that the i-th smallest member
    /// of `s` becomes vertex i.
    pub fn induced_subgraph(&self, s: &VertexSet) -> Result<Graph, GraphError> {
        for v in s.iter() {
            self.check_vertex(v)?;
        }
        let m = s.members();
        Ok(Graph::from_fn(m.len(), |a, b| self.has_edge(m[a], m[b])))
    }

    /// Connectivity by BFS from vertex 0. The graph on zero vertices counts
    /// as connected.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == self.n
    }

    pub fn is_regular(&self) -> bool {
        self.neighbors
            .windows(2)
            .all(|w| w[0].len() == w[1].len())
    }

    /// True iff the open neighbourhood of `v` contains an edge, i.e. `v`
    /// lies on a triangle.
    pub fn vertex_in_triangle(&self, v: usize) -> Result<bool, GraphError> {
        self.check_vertex(v)?;
        let nb = &self.neighbors[v];
        Ok(nb
            .iter()
            .enumerate()
            .any(|(i, &a)| nb[i + 1..].iter().any(|&b| self.has_edge(a, b))))
    }

    /// Relabels vertices by `p`: the result has edge `(p(u), p(v))` exactly
    /// when `self` has edge `(u, v)`.
    pub fn apply_permutation(&self, p: &Permutation) -> Result<Graph, GraphError> {
        if p.len() != self.n {
            return Err(GraphError::SizeMismatch {
                expected: self.n,
                got: p.len(),
            });
        }
        let mut g = Graph::empty(self.n);
        for (u, v) in self.edges() {
            g.set(p.apply(u), p.apply(v));
        }
        g.finish();
        Ok(g)
    }

    /// Serializes to the edge-list text format accepted by [`parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edge_count);
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

/// Parses the edge-list format: a header `n m`, then exactly `m` lines `u v`.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_edge_list(text: &[u8]) -> Result<Graph, ParseError> {
    let text = std::str::from_utf8(text).map_err(|e| {
        let line = text[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        ParseError::new(line, "input is not valid UTF-8")
    })?;

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| ParseError::new(1, "missing header line \"n m\""))?;
    let (n, m) = parse_pair(header_line, header, "header")?;

    let mut g = Graph::empty(n);
    let mut seen = 0;
    for (line, content) in lines {
        if seen == m {
            return Err(ParseError::new(
                line,
                format!("more edge lines than the {m} declared in the header"),
            ));
        }
        let (u, v) = parse_pair(line, content, "edge")?;
        g.insert_edge(u, v)
            .map_err(|e| ParseError::new(line, e.to_string()))?;
        seen += 1;
    }
    if seen != m {
        let last = text.lines().count().max(1);
        return Err(ParseError::new(
            last,
            format!("header declares {m} edges but {seen} were found"),
        ));
    }
    g.finish();
    Ok(g)
}

fn parse_pair(line: usize, content: &str, what: &str) -> Result<(usize, usize), ParseError> {
    let fields: Vec<&str> = content.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(ParseError::new(
            line,
            format!("malformed {what}: expected two integers, found {:?}", content),
        ));
    }
    let num = |s: &str| {
        s.parse::<usize>().map_err(|_| {
            ParseError::new(line, format!("malformed {what}: {s:?} is not a non-negative integer"))
        })
    };
    Ok((num(fields[0])?, num(fields[1])?))
}

/// A few named graphs used throughout the tests, CLI fixtures and docs.
pub mod named {
    use super::Graph;

    pub fn complete(n: usize) -> Graph {
        Graph::from_fn(n, |_, _| true)
    }

    pub fn cycle(n: usize) -> Graph {
        Graph::from_fn(n, |u, v| v == u + 1 || (u == 0 && v == n - 1 && n > 2))
    }

    pub fn path(n: usize) -> Graph {
        Graph::from_fn(n, |u, v| v == u + 1)
    }

    /// Triangles {0,1,2} and {3,4,5} joined by the matching 0-3, 1-4, 2-5.
    pub fn prism() -> Graph {
        Graph::from_edges(
            6,
            &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)],
        )
        .expect("valid prism")
    }

    /// K_{2,2,2}; the parts are {0,1}, {2,3}, {4,5}.
    pub fn octahedron() -> Graph {
        Graph::from_fn(6, |u, v| u / 2 != v / 2)
    }

    pub fn complete_bipartite(a: usize, b: usize) -> Graph {
        Graph::from_fn(a + b, |u, v| (u < a) != (v < a))
    }

    /// Outer 5-cycle 0..4, inner pentagram 5..9, spokes i-(i+5).
    pub fn petersen() -> Graph {
        Graph::from_fn(10, |u, v| {
            if v < 5 {
                (v + 5 - u) % 5 == 1 || (v + 5 - u) % 5 == 4
            } else if u >= 5 {
                let d = (v - u) % 5;
                d == 2 || d == 3
            } else {
                v == u + 5
            }
        })
    }

    /// `k` vertex-disjoint triangles {3i, 3i+1, 3i+2}.
    pub fn disjoint_triangles(k: usize) -> Graph {
        Graph::from_fn(3 * k, |u, v| u / 3 == v / 3)
    }

    /// Three triangles {0,1,2}, {3,4,5}, {6,7,8} with cross edges 0-3, 3-6, 6-0.
    pub fn triangle_ring() -> Graph {
        let mut edges: Vec<(usize, usize)> = (0..3)
            .flat_map(|b| [(3 * b, 3 * b + 1), (3 * b + 1, 3 * b + 2), (3 * b, 3 * b + 2)])
            .collect();
        edges.extend([(0, 3), (3, 6), (0, 6)]);
        Graph::from_edges(9, &edges).expect("valid ring")
    }
}
