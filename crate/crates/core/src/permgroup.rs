//! Permutation algebra, sparse partial maps, and generator reduction.
//!
//! [`reduce_generators`] is Jerrum's filter: every kept generator labels an
//! edge `{i, g(i)}` of a forest on the `n` points, where `i` is the least
//! point `g` moves. A forest on `n` points has at most `n - 1` edges, which
//! is the size bound on the output.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("permutation size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("images do not form a bijection on 0..{0}")]
    NotABijection(usize),
    #[error("partial maps overlap at position {0}")]
    OverlappingSupport(usize),
    #[error("partial map sends two positions to vertex {0}")]
    NotInjective(usize),
    #[error("cycle notation: {0}")]
    CycleSyntax(String),
}

/// A bijection on `0..n`, stored in one-line form: `p ↦ images[p]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation {
    images: Vec<usize>,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_cycles())
    }
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self, GroupError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || std::mem::replace(&mut seen[x], true) {
                return Err(GroupError::NotABijection(n));
            }
        }
        Ok(Permutation { images })
    }

    /// Parses cycle notation such as `(0 1 2)(3 4)` or `()` on `n` points.
    pub fn from_cycles(n: usize, text: &str) -> Result<Self, GroupError> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .ok_or_else(|| GroupError::CycleSyntax(format!("expected '(' in {text:?}")))?;
            let close = body
                .find(')')
                .ok_or_else(|| GroupError::CycleSyntax(format!("unclosed cycle in {text:?}")))?;
            let points = body[..close]
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|_| GroupError::CycleSyntax(format!("bad point {s:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            for (i, &p) in points.iter().enumerate() {
                if p >= n {
                    return Err(GroupError::NotABijection(n));
                }
                images[p] = points[(i + 1) % points.len()];
            }
            rest = body[close + 1..].trim_start();
        }
        Permutation::from_images(images)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    #[inline]
    pub fn apply(&self, p: usize) -> usize {
        self.images[p]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, GroupError> {
        if self.len() != other.len() {
            return Err(GroupError::SizeMismatch(self.len(), other.len()));
        }
        Ok(Permutation {
            images: other.images.iter().map(|&x| self.images[x]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x] = i;
        }
        Permutation { images }
    }

    /// Least point moved, if any.
    pub fn first_moved(&self) -> Option<usize> {
        self.images.iter().enumerate().position(|(i, &x)| i != x)
    }

    pub fn to_cycles(&self) -> String {
        let mut seen = vec![false; self.len()];
        let mut out = String::new();
        for start in 0..self.len() {
            if seen[start] || self.images[start] == start {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.images[start];
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.images[x];
            }
            let body: Vec<String> = cycle.iter().map(|c| c.to_string()).collect();
            out.push_str(&format!("({})", body.join(" ")));
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }

    fn compose_unchecked(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other.images.iter().map(|&x| self.images[x]).collect(),
        }
    }
}

pub fn compose(a: &Permutation, b: &Permutation) -> Result<Permutation, GroupError> {
    a.compose(b)
}

pub fn inverse(a: &Permutation) -> Permutation {
    a.inverse()
}

pub fn identity(n: usize) -> Permutation {
    Permutation::identity(n)
}

/// An injective assignment of arrangement positions to vertices, kept
/// sorted by position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartialMap {
    entries: Vec<(usize, usize)>,
}

impl PartialMap {
    pub fn new(mut entries: Vec<(usize, usize)>) -> Result<Self, GroupError> {
        entries.sort_unstable();
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(GroupError::OverlappingSupport(w[0].0));
        }
        let mut values: Vec<usize> = entries.iter().map(|e| e.1).collect();
        values.sort_unstable();
        if let Some(w) = values.windows(2).find(|w| w[0] == w[1]) {
            return Err(GroupError::NotInjective(w[0]));
        }
        Ok(PartialMap { entries })
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, position: usize) -> Option<usize> {
        self.entries
            .binary_search_by_key(&position, |e| e.0)
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn values(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.1)
    }

    pub fn same_support(&self, other: &PartialMap) -> bool {
        self.len() == other.len() && self.support().eq(other.support())
    }

    /// Keeps only the entries whose position satisfies `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(usize) -> bool) -> PartialMap {
        PartialMap {
            entries: self.entries.iter().copied().filter(|e| keep(e.0)).collect(),
        }
    }

    /// Post-composes with a vertex permutation: position `p ↦ s(self(p))`.
    pub fn then(&self, s: &Permutation) -> PartialMap {
        PartialMap {
            entries: self.entries.iter().map(|&(p, v)| (p, s.apply(v))).collect(),
        }
    }
}

/// Union of two partial maps with disjoint supports.
///
/// Returns `Ok(None)` when both maps use the same vertex (a collision, which
/// callers drop) and an error when the supports overlap.
pub fn direct_product(a: &PartialMap, b: &PartialMap) -> Result<Option<PartialMap>, GroupError> {
    let mut entries = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.entries.len() || j < b.entries.len() {
        let take_a = match (a.entries.get(i), b.entries.get(j)) {
            (Some(x), Some(y)) if x.0 == y.0 => return Err(GroupError::OverlappingSupport(x.0)),
            (Some(x), Some(y)) => x.0 < y.0,
            (Some(_), None) => true,
            _ => false,
        };
        if take_a {
            entries.push(a.entries[i]);
            i += 1;
        } else {
            entries.push(b.entries[j]);
            j += 1;
        }
    }
    if a.values().any(|v| b.values().any(|w| w == v)) {
        return Ok(None);
    }
    Ok(Some(PartialMap { entries }))
}

/// A generating set, optionally paired with a coset representative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSet {
    pub n: usize,
    pub generators: Vec<Permutation>,
    pub representative: Option<Permutation>,
}

impl GenSet {
    pub fn new(n: usize) -> Self {
        GenSet {
            n,
            generators: Vec::new(),
            representative: None,
        }
    }

    /// Wraps generators as given, without reduction (identity dropped).
    pub fn from_generators(n: usize, generators: Vec<Permutation>) -> Result<Self, GroupError> {
        if let Some(p) = generators.iter().find(|p| p.len() != n) {
            return Err(GroupError::SizeMismatch(n, p.len()));
        }
        Ok(GenSet {
            n,
            generators: generators.into_iter().filter(|p| !p.is_identity()).collect(),
            representative: None,
        })
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

struct ForestEdge {
    /// Least point moved by `label`.
    low: usize,
    high: usize,
    label: Vec<usize>,
    inverse: Vec<usize>,
}

/// A forest on the points `0..n` whose edges `{i, g(i)}` are labelled by
/// permutations `g` with least moved point `i`. Scratch buffers are reused
/// across sifts.
struct Forest {
    n: usize,
    edges: Vec<ForestEdge>,
    via: Vec<usize>,
    queue: Vec<usize>,
    path: Vec<usize>,
    /// Cycle steps as (from, to, edge), `NEW_EDGE` for the incoming one.
    steps: Vec<(usize, usize, usize)>,
    product: Vec<usize>,
}

const NEW_EDGE: usize = usize::MAX;

impl Forest {
    fn new(n: usize) -> Self {
        Forest {
            n,
            edges: Vec::new(),
            via: vec![NEW_EDGE; n],
            queue: Vec::with_capacity(n),
            path: Vec::with_capacity(n),
            steps: Vec::with_capacity(n + 1),
            product: vec![0; n],
        }
    }

    fn other_end(&self, e: usize, x: usize) -> usize {
        let edge = &self.edges[e];
        if edge.low == x {
            edge.high
        } else {
            edge.low
        }
    }

    /// Fills `self.path` with the edges from `from` to `to`, if connected.
    fn find_path(&mut self, from: usize, to: usize) -> bool {
        self.via.iter_mut().for_each(|v| *v = NEW_EDGE);
        self.queue.clear();
        self.queue.push(from);
        let mut head = 0;
        let mut found = false;
        while head < self.queue.len() && !found {
            let u = self.queue[head];
            head += 1;
            for e in 0..self.edges.len() {
                let (a, b) = (self.edges[e].low, self.edges[e].high);
                let v = if a == u {
                    b
                } else if b == u {
                    a
                } else {
                    continue;
                };
                if v != from && self.via[v] == NEW_EDGE {
                    self.via[v] = e;
                    self.queue.push(v);
                    if v == to {
                        found = true;
                        break;
                    }
                }
            }
        }
        if !found {
            return false;
        }
        self.path.clear();
        let mut x = to;
        while x != from {
            let e = self.via[x];
            self.path.push(e);
            x = self.other_end(e, x);
        }
        self.path.reverse();
        true
    }

    /// Adds `g` to the forest. Whenever the new edge closes a cycle, one
    /// edge at the cycle's least point is dropped and the cycle product,
    /// which fixes every point up to and including that least point, is
    /// sifted in turn.
    fn sift(&mut self, mut g: Vec<usize>) {
        loop {
            let Some(low) = (0..self.n).find(|&i| g[i] != i) else {
                return;
            };
            let high = g[low];
            if !self.find_path(high, low) {
                self.push_edge(low, high, g);
                return;
            }

            self.steps.clear();
            self.steps.push((low, high, NEW_EDGE));
            let mut at = high;
            for i in 0..self.path.len() {
                let e = self.path[i];
                let next = self.other_end(e, at);
                self.steps.push((at, next, e));
                at = next;
            }
            let start = (0..self.steps.len())
                .min_by_key(|&i| self.steps[i].0)
                .expect("non-empty cycle");
            self.steps.rotate_left(start);

            for (x, p) in self.product.iter_mut().enumerate() {
                *p = x;
            }
            for &(from, to, e) in &self.steps {
                let label = if e == NEW_EDGE {
                    &g
                } else if self.edges[e].label[from] == to {
                    &self.edges[e].label
                } else {
                    &self.edges[e].inverse
                };
                for p in self.product.iter_mut() {
                    *p = label[*p];
                }
            }
            debug_assert_eq!(self.product[self.steps[0].0], self.steps[0].0);

            let dropped = self.steps[0].2;
            let product = self.product.clone();
            if dropped != NEW_EDGE {
                self.edges.swap_remove(dropped);
                self.push_edge(low, high, g);
            }
            g = product;
        }
    }

    fn push_edge(&mut self, low: usize, high: usize, label: Vec<usize>) {
        let mut inverse = vec![0; label.len()];
        for (i, &x) in label.iter().enumerate() {
            inverse[x] = i;
        }
        self.edges.push(ForestEdge {
            low,
            high,
            label,
            inverse,
        });
    }
}

/// Jerrum's filter: reduces `perms` to at most `n - 1` generators of the
/// same group.
pub fn reduce_generators(perms: &[Permutation], n: usize) -> Result<GenSet, GroupError> {
    if let Some(p) = perms.iter().find(|p| p.len() != n) {
        return Err(GroupError::SizeMismatch(n, p.len()));
    }
    let mut forest = Forest::new(n);
    for p in perms {
        forest.sift(p.images.clone());
    }
    let mut edges = forest.edges;
    edges.sort_by_key(|e| (e.low, e.high));
    Ok(GenSet {
        n,
        generators: edges
            .into_iter()
            .map(|e| Permutation { images: e.label })
            .collect(),
        representative: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Closure {
    Complete(HashSet<Permutation>),
    CapExceeded,
}

impl Closure {
    pub fn order(&self) -> Option<usize> {
        match self {
            Closure::Complete(set) => Some(set.len()),
            Closure::CapExceeded => None,
        }
    }
}

/// Breadth-first closure of `s.generators` under composition, giving up
/// once more than `cap` elements have been found.
pub fn closure(s: &GenSet, cap: usize) -> Closure {
    let id = Permutation::identity(s.n);
    let mut seen = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in &s.generators {
            let y = g.compose_unchecked(&x);
            if !seen.contains(&y) {
                if seen.len() >= cap {
                    return Closure::CapExceeded;
                }
                seen.insert(y.clone());
                queue.push_back(y);
            }
        }
    }
    Closure::Complete(seen)
}
