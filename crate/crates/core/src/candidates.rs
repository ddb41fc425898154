//! Search trees over `H` and the candidate sets they yield.
//!
//! The tree for a block has three levels under the root, one per block
//! position in the order `j_k`, `j_k - 1`, `i_k`: every vertex of `H`, then
//! its neighbours, then the common neighbours of the two ancestors. Each
//! root-to-leaf path is an ordered triangle of `H` and becomes one partial
//! map onto the block's positions.

use serde::Serialize;

use crate::graph::Graph;
use crate::permgroup::PartialMap;
use crate::rearrange::Block;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecondLevel {
    pub vertex: usize,
    pub leaves: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstLevel {
    pub vertex: usize,
    pub children: Vec<SecondLevel>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchTree {
    pub positions: [usize; 3],
    pub roots: Vec<FirstLevel>,
}

impl SearchTree {
    pub fn level_sizes(&self) -> [usize; 3] {
        let l1 = self.roots.len();
        let l2 = self.roots.iter().map(|r| r.children.len()).sum();
        [l1, l2, self.leaf_count()]
    }

    pub fn leaf_count(&self) -> usize {
        self.roots
            .iter()
            .flat_map(|r| &r.children)
            .map(|c| c.leaves.len())
            .sum()
    }

    /// Root-to-leaf paths as `[level1, level2, level3]` vertex triples.
    pub fn paths(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        self.roots.iter().flat_map(|r| {
            r.children
                .iter()
                .flat_map(move |c| c.leaves.iter().map(move |&l| [r.vertex, c.vertex, l]))
        })
    }
}

pub fn build_search_tree(h: &Graph, block: &Block) -> SearchTree {
    let roots = (0..h.n())
        .map(|u| FirstLevel {
            vertex: u,
            children: h
                .neighbors(u)
                .iter()
                .map(|&w| SecondLevel {
                    vertex: w,
                    leaves: h
                        .neighbors(u)
                        .iter()
                        .copied()
                        .filter(|&c| c != w && h.has_edge(w, c))
                        .collect(),
                })
                .collect(),
        })
        .collect();
    SearchTree {
        positions: block.positions(),
        roots,
    }
}

/// The candidate set `β_k` for one block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateSet {
    pub k: usize,
    pub maps: Vec<PartialMap>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// Image triples in path order (`j_k`, `j_k - 1`, `i_k`).
    pub fn image_triples(&self, block: &Block) -> Vec<[usize; 3]> {
        self.maps
            .iter()
            .map(|m| block.positions().map(|p| m.get(p).expect("full block support")))
            .collect()
    }
}

fn dress(block: &Block, triples: impl Iterator<Item = [usize; 3]>) -> CandidateSet {
    let [pj, pj1, pi] = block.positions();
    let maps = triples
        .map(|[a, b, c]| {
            PartialMap::new(vec![(pj, a), (pj1, b), (pi, c)]).expect("path vertices are distinct")
        })
        .collect();
    CandidateSet { k: block.k, maps }
}

/// One partial map per root-to-leaf path of `tree`.
pub fn enumerate_beta(tree: &SearchTree, block: &Block) -> CandidateSet {
    dress(block, tree.paths())
}

/// The ordered-triangle list of `H`, computed once and re-dressed for each
/// block. Every block shares the triangle pattern, so all `β_k` agree up to
/// their positions.
#[derive(Debug, Clone)]
pub struct CandidateCache {
    triangles: Vec<[usize; 3]>,
}

impl CandidateCache {
    pub fn new(h: &Graph) -> Self {
        let probe = Block::new(1, 3, [0, 0, 0]);
        CandidateCache {
            triangles: build_search_tree(h, &probe).paths().collect(),
        }
    }

    pub fn ordered_triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn beta(&self, block: &Block) -> CandidateSet {
        dress(block, self.triangles.iter().copied())
    }
}
