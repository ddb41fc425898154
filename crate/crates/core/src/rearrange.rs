//! Orders the vertices of `G` into an arrangement tiled by triangle blocks.
//!
//! Labels are handed out from `n` downwards. Block 1 starts from the seed
//! vertex (label `n`), takes a neighbour (label `n-1`) and then a common
//! neighbour of both (label `n-2`); every later block starts from the first
//! unlabelled vertex under the tie-break order and does the same inside the
//! unlabelled vertices. The whole thing runs under chronological
//! backtracking, so a tiling is found whenever one exists.
//!
//! Positions are 1-based and equal labels: block `k` occupies
//! `[i_k, j_k] = [n - 3k + 1, n - 3k + 3]`, with its first-chosen vertex at
//! `j_k`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

/// Order in which the rearrangement tries candidate vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    LowestId,
    /// A fixed pseudo-random vertex order derived from the given seed.
    Shuffled(u64),
}

/// Why no arrangement exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Error)]
#[serde(tag = "code", rename_all = "kebab-case")]
pub enum Infeasible {
    #[error("vertex count {n} is not divisible by 3")]
    NotDivisibleBy3 { n: usize },
    #[error("no triangle block could be completed (deepest failure at block {at_block})")]
    NoTriangleBlock { at_block: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RearrangeError {
    #[error("infeasible: {0}")]
    Infeasible(Infeasible),
    #[error("seed vertex {seed} out of range for {n} vertices")]
    SeedOutOfRange { seed: usize, n: usize },
    #[error("block index {k} out of range 1..={x}")]
    BlockOutOfRange { k: usize, x: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    /// 1-based block index.
    pub k: usize,
    /// Start position `i_k`.
    pub i: usize,
    /// End position `j_k = i_k + 2`.
    pub j: usize,
    /// Vertices at positions `j_k`, `j_k - 1`, `i_k`.
    pub vertices: [usize; 3],
}

impl Block {
    /// Block `k` of an arrangement on `n` vertices.
    pub fn new(k: usize, n: usize, vertices: [usize; 3]) -> Self {
        let j = n + 3 - 3 * k;
        Block {
            k,
            i: j - 2,
            j,
            vertices,
        }
    }

    /// Positions in assignment order: `j_k`, `j_k - 1`, `i_k`.
    pub fn positions(&self) -> [usize; 3] {
        [self.j, self.j - 1, self.i]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrangement {
    pub n: usize,
    /// `w[p - 1]` is the vertex at position `p`.
    pub w: Vec<usize>,
    pub blocks: Vec<Block>,
}

impl Arrangement {
    /// Number of blocks.
    pub fn x(&self) -> usize {
        self.blocks.len()
    }

    /// Vertex of `G` at 1-based position `p`.
    #[inline]
    pub fn vertex_at(&self, p: usize) -> usize {
        self.w[p - 1]
    }

    pub fn block(&self, k: usize) -> Result<&Block, RearrangeError> {
        if k == 0 || k > self.blocks.len() {
            return Err(RearrangeError::BlockOutOfRange {
                k,
                x: self.blocks.len(),
            });
        }
        Ok(&self.blocks[k - 1])
    }

    fn from_blocks(n: usize, triples: &[[usize; 3]]) -> Self {
        let mut w = vec![usize::MAX; n];
        let blocks: Vec<Block> = triples
            .iter()
            .enumerate()
            .map(|(idx, &vertices)| Block::new(idx + 1, n, vertices))
            .collect();
        for b in &blocks {
            for (pos, v) in b.positions().into_iter().zip(b.vertices) {
                w[pos - 1] = v;
            }
        }
        Arrangement { n, w, blocks }
    }
}

/// Runs the rearrangement from `seed`.
pub fn rearrange(g: &Graph, seed: usize, policy: TieBreak) -> Result<Arrangement, RearrangeError> {
    let n = g.n();
    if seed >= n && n > 0 {
        return Err(RearrangeError::SeedOutOfRange { seed, n });
    }
    if n == 0 || !n.is_multiple_of(3) {
        return Err(RearrangeError::Infeasible(Infeasible::NotDivisibleBy3 { n }));
    }

    let order: Vec<usize> = match policy {
        TieBreak::LowestId => (0..n).collect(),
        TieBreak::Shuffled(s) => {
            let mut v: Vec<usize> = (0..n).collect();
            v.shuffle(&mut ChaCha8Rng::seed_from_u64(s));
            v
        }
    };
    let mut rank = vec![0; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }

    let mut search = Search {
        g,
        order: &order,
        rank: &rank,
        labeled: vec![false; n],
        blocks: Vec::with_capacity(n / 3),
        deepest_failure: 0,
    };
    if search.extend(seed) {
        Ok(Arrangement::from_blocks(n, &search.blocks))
    } else {
        Err(RearrangeError::Infeasible(Infeasible::NoTriangleBlock {
            at_block: search.deepest_failure.max(1),
        }))
    }
}

struct Search<'a> {
    g: &'a Graph,
    order: &'a [usize],
    rank: &'a [usize],
    labeled: Vec<bool>,
    blocks: Vec<[usize; 3]>,
    deepest_failure: usize,
}

impl Search<'_> {
    fn ordered_unlabeled(&self, vs: impl Iterator<Item = usize>) -> Vec<usize> {
        let mut out: Vec<usize> = vs.filter(|&v| !self.labeled[v]).collect();
        out.sort_unstable_by_key(|&v| self.rank[v]);
        out
    }

    fn extend(&mut self, anchor: usize) -> bool {
        let k = self.blocks.len() + 1;
        self.labeled[anchor] = true;
        for b in self.ordered_unlabeled(self.g.neighbors(anchor).iter().copied()) {
            self.labeled[b] = true;
            let common = self
                .g
                .neighbors(anchor)
                .iter()
                .copied()
                .filter(|&c| self.g.has_edge(b, c));
            for c in self.ordered_unlabeled(common) {
                self.labeled[c] = true;
                self.blocks.push([anchor, b, c]);
                let next = self.order.iter().copied().find(|&v| !self.labeled[v]);
                match next {
                    None => return true,
                    Some(v) if self.extend(v) => return true,
                    Some(_) => {}
                }
                self.blocks.pop();
                self.labeled[c] = false;
            }
            self.labeled[b] = false;
        }
        self.labeled[anchor] = false;
        self.deepest_failure = self.deepest_failure.max(k);
        false
    }
}

/// Block `k` of `a` as an induced subgraph of `g`, vertices in block order.
pub fn block_pattern(a: &Arrangement, g: &Graph, k: usize) -> Result<Graph, RearrangeError> {
    let vs = a.block(k)?.vertices;
    Ok(Graph::from_fn(3, |x, y| g.has_edge(vs[x], vs[y])))
}
