//! Exhaustive ground truth for small graphs.
//!
//! Nothing here shares code with the pipeline beyond [`Graph`] and
//! [`Permutation`]: isomorphisms are found by plain vertex-by-vertex
//! backtracking with degree and adjacency pruning, and triangle tilings by
//! a bitmask search.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;
use crate::permgroup::Permutation;

/// Largest vertex count the oracle accepts.
pub const HARD_LIMIT: usize = 16;
/// Above this the oracle still runs but reports a warning.
pub const RECOMMENDED_LIMIT: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("refusing brute-force search on {n} vertices (limit {HARD_LIMIT})")]
    TooLarge { n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    /// `P` with `H^P = G`, i.e. mapping vertices of `H` onto vertices of `G`.
    pub witness: Option<Permutation>,
    /// Number of isomorphisms, when full enumeration was requested.
    pub count: Option<u64>,
    pub nodes_explored: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl OracleResult {
    pub fn is_isomorphic(&self) -> bool {
        self.witness.is_some()
    }
}

struct Backtrack<'a> {
    g: &'a Graph,
    h: &'a Graph,
    order: Vec<usize>,
    /// `g_to_h[u]` for assigned G-vertices.
    g_to_h: Vec<usize>,
    used: Vec<bool>,
    enumerate_all: bool,
    first: Option<Vec<usize>>,
    count: u64,
    nodes: u64,
}

impl Backtrack<'_> {
    /// Returns true to stop the search.
    fn run(&mut self, depth: usize) -> bool {
        self.nodes += 1;
        if depth == self.order.len() {
            self.count += 1;
            if self.first.is_none() {
                self.first = Some(self.g_to_h.clone());
            }
            return !self.enumerate_all;
        }
        let u = self.order[depth];
        for v in 0..self.h.n() {
            if self.used[v] || self.h.degree(v) != self.g.degree(u) {
                continue;
            }
            let consistent = self.order[..depth]
                .iter()
                .all(|&a| self.g.has_edge(u, a) == self.h.has_edge(v, self.g_to_h[a]));
            if !consistent {
                continue;
            }
            self.used[v] = true;
            self.g_to_h[u] = v;
            let stop = self.run(depth + 1);
            self.used[v] = false;
            if stop {
                return true;
            }
        }
        false
    }
}

pub fn brute_force_isomorphism(
    g: &Graph,
    h: &Graph,
    enumerate_all: bool,
) -> Result<OracleResult, OracleError> {
    let n = g.n().max(h.n());
    if n > HARD_LIMIT {
        return Err(OracleError::TooLarge { n });
    }
    let warning = (n > RECOMMENDED_LIMIT)
        .then(|| format!("{n} vertices exceeds the recommended oracle size {RECOMMENDED_LIMIT}"));
    let empty = |nodes| OracleResult {
        witness: None,
        count: enumerate_all.then_some(0),
        nodes_explored: nodes,
        warning: warning.clone(),
    };
    if g.n() != h.n() || g.edge_count() != h.edge_count() {
        return Ok(empty(0));
    }

    // Vertices from the rarest degree class first, then by id.
    let degrees = g.degrees();
    let mut class_size = vec![0usize; n];
    for &d in &degrees {
        class_size[d] += 1;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (class_size[degrees[v]], v));

    let mut search = Backtrack {
        g,
        h,
        order,
        g_to_h: vec![usize::MAX; n],
        used: vec![false; n],
        enumerate_all,
        first: None,
        count: 0,
        nodes: 0,
    };
    search.run(0);

    let Some(g_to_h) = search.first else {
        return Ok(empty(search.nodes));
    };
    let mut h_to_g = vec![0; n];
    for (u, &v) in g_to_h.iter().enumerate() {
        h_to_g[v] = u;
    }
    let witness = Permutation::from_images(h_to_g).expect("bijection");
    debug_assert_eq!(h.apply_permutation(&witness).as_ref(), Ok(g));
    Ok(OracleResult {
        witness: Some(witness),
        count: enumerate_all.then_some(search.count),
        nodes_explored: search.nodes,
        warning,
    })
}

pub fn brute_force_automorphisms(g: &Graph) -> Result<OracleResult, OracleError> {
    brute_force_isomorphism(g, g, true)
}

/// Every automorphism of `g`, in discovery order.
pub fn all_automorphisms(g: &Graph) -> Result<Vec<Permutation>, OracleError> {
    all_isomorphisms(g, g)
}

/// Every `P` with `H^P = G`.
pub fn all_isomorphisms(g: &Graph, h: &Graph) -> Result<Vec<Permutation>, OracleError> {
    let n = g.n();
    if n > HARD_LIMIT {
        return Err(OracleError::TooLarge { n });
    }
    if h.n() != n {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut g_to_h = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn rec(
        g: &Graph,
        h: &Graph,
        u: usize,
        g_to_h: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Permutation>,
    ) {
        if u == g.n() {
            let mut h_to_g = vec![0; g.n()];
            for (a, &b) in g_to_h.iter().enumerate() {
                h_to_g[b] = a;
            }
            out.push(Permutation::from_images(h_to_g).expect("bijection"));
            return;
        }
        for v in 0..h.n() {
            if used[v] || (0..u).any(|a| g.has_edge(u, a) != h.has_edge(v, g_to_h[a])) {
                continue;
            }
            used[v] = true;
            g_to_h[u] = v;
            rec(g, h, u + 1, g_to_h, used, out);
            used[v] = false;
        }
    }
    rec(g, h, 0, &mut g_to_h, &mut used, &mut out);
    Ok(out)
}

/// Whether the vertex set splits into vertex-disjoint triangles.
pub fn triangle_partition_exists(g: &Graph) -> bool {
    let n = g.n();
    if !n.is_multiple_of(3) {
        return false;
    }
    assert!(n <= 64, "triangle partition oracle supports at most 64 vertices");
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut dead = HashSet::new();
    tile(g, 0, full, &mut dead)
}

fn tile(g: &Graph, covered: u64, full: u64, dead: &mut HashSet<u64>) -> bool {
    if covered == full {
        return true;
    }
    if dead.contains(&covered) {
        return false;
    }
    let v = (!covered).trailing_zeros() as usize;
    let free = |x: usize| covered & (1u64 << x) == 0;
    let nb = g.neighbors(v);
    for (ia, &a) in nb.iter().enumerate() {
        if !free(a) {
            continue;
        }
        for &b in &nb[ia + 1..] {
            if free(b) && g.has_edge(a, b) {
                let next = covered | (1u64 << v) | (1u64 << a) | (1u64 << b);
                if tile(g, next, full, dead) {
                    return true;
                }
            }
        }
    }
    dead.insert(covered);
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named::*;

    #[test]
    fn isomorphism_counts() {
        let k3 = complete(3);
        assert_eq!(brute_force_isomorphism(&k3, &k3, true).unwrap().count, Some(6));
        assert_eq!(brute_force_automorphisms(&complete(4)).unwrap().count, Some(24));
        assert_eq!(brute_force_automorphisms(&prism()).unwrap().count, Some(12));
        assert_eq!(brute_force_automorphisms(&octahedron()).unwrap().count, Some(48));
        assert_eq!(brute_force_automorphisms(&path(3)).unwrap().count, Some(2));
        assert_eq!(brute_force_automorphisms(&petersen()).unwrap().count, Some(120));
    }

    #[test]
    fn prism_count_matches_hand_enumeration() {
        // Swap the two triangles (x2), rotate (x3), reflect (x2).
        assert_eq!(all_automorphisms(&prism()).unwrap().len(), 2 * 3 * 2);
        // K_{2,2,2}: permute the three parts (3!) and swap within each (2^3).
        assert_eq!(all_automorphisms(&octahedron()).unwrap().len(), 6 * 8);
    }

    #[test]
    fn non_isomorphic_pairs() {
        let r = brute_force_isomorphism(&prism(), &octahedron(), false).unwrap();
        assert!(r.witness.is_none());
        let r = brute_force_isomorphism(&prism(), &disjoint_triangles(2), true).unwrap();
        assert_eq!(r.count, Some(0));
        let r = brute_force_isomorphism(&cycle(6), &disjoint_triangles(2), false).unwrap();
        assert!(!r.is_isomorphic());
    }

    #[test]
    fn witness_verifies() {
        let g = prism();
        let p = Permutation::from_images(vec![4, 2, 0, 5, 1, 3]).unwrap();
        let h = g.apply_permutation(&p).unwrap();
        let r = brute_force_isomorphism(&g, &h, false).unwrap();
        let w = r.witness.unwrap();
        assert_eq!(h.apply_permutation(&w).unwrap(), g);
    }

    #[test]
    fn size_guard() {
        let big = complete(17);
        assert_eq!(
            brute_force_isomorphism(&big, &big, false),
            Err(OracleError::TooLarge { n: 17 })
        );
        let r = brute_force_isomorphism(&cycle(13), &cycle(13), false).unwrap();
        assert!(r.warning.is_some() && r.is_isomorphic());
    }

    #[test]
    fn triangle_partitions() {
        assert!(triangle_partition_exists(&prism()));
        assert!(!triangle_partition_exists(&cycle(6)));
        assert!(triangle_partition_exists(&disjoint_triangles(2)));
        assert!(!triangle_partition_exists(&cycle(5)));
        assert!(!triangle_partition_exists(&complete_bipartite(3, 3)));
        assert!(triangle_partition_exists(&octahedron()));
    }
}
