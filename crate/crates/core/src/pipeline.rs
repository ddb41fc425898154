//! The block-by-block isomorphism search.
//!
//! Candidates for blocks 1 and 2 are combined by direct product and filtered
//! against `G`'s adjacency over every covered position pair; the survivors
//! are then combined with block 3's candidates, and so on until every block
//! is covered. A surviving full-support map becomes a witness permutation.
//!
//! Two modes share that loop:
//!
//! * [`Mode::Exact`] carries every surviving partial map forward (capped).
//! * [`Mode::Compressed`] keeps one survivor `σ0` plus a reduced generating
//!   set `S` of vertex permutations of `H` with `s ∘ σ0` reproducing the
//!   other survivors, and only carries `σ0` and `s ∘ σ0` for `s ∈ S` into
//!   the next product. This is lossy whenever `S` was reduced; how lossy is
//!   exactly what the fuzz harness measures.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::candidates::{CandidateCache, CandidateSet};
use crate::graph::Graph;
use crate::permgroup::{direct_product, reduce_generators, GenSet, PartialMap, Permutation};
use crate::rearrange::{rearrange, Arrangement, Infeasible, RearrangeError, TieBreak};

pub const DEFAULT_CAP: usize = 1_000_000;
pub const DEFAULT_RETRY_BUDGET: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Exact,
    Compressed,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Compressed => "compressed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Options {
    pub mode: Mode,
    /// Ceiling on the number of collision-free direct products per step.
    pub cap: usize,
    /// Maximum number of arrangements tried.
    pub retry_budget: usize,
    /// Seeds the tie-break order of retried arrangements.
    pub seed: u64,
    /// Vertex of `G` that anchors the first arrangement.
    pub seed_vertex: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_ms: Option<u64>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            mode: Mode::Exact,
            cap: DEFAULT_CAP,
            retry_budget: DEFAULT_RETRY_BUDGET,
            seed: 0,
            seed_vertex: 0,
            timeout_ms: None,
        }
    }
}

impl Options {
    pub fn with_mode(mode: Mode) -> Self {
        Options {
            mode,
            ..Options::default()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("candidate cap {cap} exceeded at step {step} (|γ| > {cap})")]
    CapExceeded {
        step: usize,
        cap: usize,
        diagnostics: Box<Diagnostics>,
    },
    #[error("candidates do not share one support")]
    MixedSupports,
    #[error("arrangement covers {arrangement} vertices but the graph has {graph}")]
    SizeMismatch { arrangement: usize, graph: usize },
    #[error("block {0} is not the next uncovered block")]
    OutOfOrder(usize),
    #[error("infeasible: {0}")]
    Infeasible(Infeasible),
}

/// Per-step sizes. `beta_sizes[k-1]` is `|β_k|`; `gamma_sizes[t-1]`,
/// `alpha_sizes[t-1]` and `gen_sizes[t-1]` belong to iteration `t`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub mode: Mode,
    pub beta_sizes: Vec<usize>,
    pub gamma_sizes: Vec<usize>,
    pub alpha_sizes: Vec<usize>,
    pub gen_sizes: Vec<usize>,
    pub budget_used: usize,
    pub budget_limited: bool,
}

/// Search state after covering blocks `1..=covered_blocks`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    /// Iterations completed; `covered_blocks = t + 1` once iteration has begun.
    pub t: usize,
    pub covered_blocks: usize,
    pub mode: Mode,
    /// `α_t` in exact mode; `β_1` before the first iteration in either mode.
    pub exact_maps: Vec<PartialMap>,
    /// Compressed-mode representative `σ0`.
    pub representative: Option<PartialMap>,
    /// Compressed-mode generators, acting on the vertices of `H`.
    pub gens: GenSet,
    pub cap: usize,
    pub diagnostics: Diagnostics,
}

impl State {
    /// Maps carried into the next direct product.
    pub fn carriers(&self) -> Vec<PartialMap> {
        match (&self.representative, self.mode) {
            (Some(sigma0), Mode::Compressed) => {
                let mut out = vec![sigma0.clone()];
                for s in &self.gens.generators {
                    let m = sigma0.then(s);
                    if !out.contains(&m) {
                        out.push(m);
                    }
                }
                out
            }
            _ => self.exact_maps.clone(),
        }
    }

    /// The surviving full or partial map used for a witness, if any.
    pub fn first_survivor(&self) -> Option<&PartialMap> {
        self.representative.as_ref().or(self.exact_maps.first())
    }
}

/// Either the search continues or it has run dry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Alive(State),
    NoWitnessFound(Diagnostics),
}

fn consistent(phi: &PartialMap, g: &Graph, h: &Graph, a: &Arrangement) -> bool {
    let e = phi.entries();
    e.iter().enumerate().all(|(i, &(p, x))| {
        let gp = a.vertex_at(p);
        e[i + 1..]
            .iter()
            .all(|&(q, y)| g.has_edge(gp, a.vertex_at(q)) == h.has_edge(x, y))
    })
}

/// Adjacency of each new position (in `G`) and of each vertex of `H` to the
/// covered positions of one carrier, as bitsets in carrier entry order. A
/// candidate vertex fits a new position iff the two bitsets are equal.
struct Signatures {
    words: usize,
    positions: Vec<u64>,
    vertices: Vec<u64>,
}

impl Signatures {
    fn new(carrier: &PartialMap, new_positions: [usize; 3], g: &Graph, h: &Graph, a: &Arrangement) -> Self {
        let entries = carrier.entries();
        let words = entries.len().div_ceil(64).max(1);
        let mut positions = vec![0u64; 3 * words];
        for (x, &p) in new_positions.iter().enumerate() {
            let gp = a.vertex_at(p);
            for (bit, &(q, _)) in entries.iter().enumerate() {
                if g.has_edge(gp, a.vertex_at(q)) {
                    positions[x * words + bit / 64] |= 1 << (bit % 64);
                }
            }
        }
        let mut vertices = vec![0u64; h.n() * words];
        for (bit, &(_, u)) in entries.iter().enumerate() {
            for &v in h.neighbors(u) {
                vertices[v * words + bit / 64] |= 1 << (bit % 64);
            }
        }
        Signatures {
            words,
            positions,
            vertices,
        }
    }

    #[inline]
    fn matches(&self, slot: usize, v: usize) -> bool {
        let w = self.words;
        self.positions[slot * w..(slot + 1) * w] == self.vertices[v * w..(v + 1) * w]
    }
}

/// Keeps the candidates whose adjacency pattern over every pair of supported
/// positions matches `G`'s along the arrangement. This one condition covers
/// both the within-block and the cross-block checks.
pub fn consistency_filter(
    candidates: &[PartialMap],
    g: &Graph,
    h: &Graph,
    arrangement: &Arrangement,
) -> Result<Vec<PartialMap>, PipelineError> {
    check_sizes(g, h, arrangement)?;
    if let Some(first) = candidates.first() {
        if candidates.iter().any(|c| !c.same_support(first)) {
            return Err(PipelineError::MixedSupports);
        }
    }
    Ok(candidates
        .iter()
        .filter(|c| consistent(c, g, h, arrangement))
        .cloned()
        .collect())
}

fn check_sizes(g: &Graph, h: &Graph, a: &Arrangement) -> Result<(), PipelineError> {
    for n in [g.n(), h.n()] {
        if n != a.n {
            return Err(PipelineError::SizeMismatch {
                arrangement: a.n,
                graph: n,
            });
        }
    }
    Ok(())
}

/// The state before any iteration: block 1 covered by `β_1` alone.
pub fn first_block_state(beta_1: &CandidateSet, mode: Mode, cap: usize) -> State {
    State {
        t: 0,
        covered_blocks: 1,
        mode,
        exact_maps: beta_1.maps.clone(),
        representative: None,
        gens: GenSet::new(0),
        cap,
        diagnostics: Diagnostics {
            mode,
            beta_sizes: vec![beta_1.len()],
            ..Diagnostics::default()
        },
    }
}

/// Iteration 1: products `β_1 × β_2`, filtered, then compressed in
/// compressed mode.
#[allow(clippy::too_many_arguments)]
pub fn init_state(
    g: &Graph,
    h: &Graph,
    arrangement: &Arrangement,
    beta_1: &CandidateSet,
    beta_2: &CandidateSet,
    mode: Mode,
    cap: usize,
) -> Result<Outcome, PipelineError> {
    extend(first_block_state(beta_1, mode, cap), beta_2, g, h, arrangement)
}

/// Adds the next block: every carrier times every candidate in `beta_next`,
/// dropping value collisions, then the consistency filter.
pub fn extend(
    state: State,
    beta_next: &CandidateSet,
    g: &Graph,
    h: &Graph,
    arrangement: &Arrangement,
) -> Result<Outcome, PipelineError> {
    check_sizes(g, h, arrangement)?;
    if beta_next.k != state.covered_blocks + 1 {
        return Err(PipelineError::OutOfOrder(beta_next.k));
    }
    let step = state.t + 1;
    let mut diagnostics = state.diagnostics.clone();
    diagnostics.beta_sizes.push(beta_next.len());

    let block = arrangement
        .block(beta_next.k)
        .map_err(|_| PipelineError::OutOfOrder(beta_next.k))?;
    let new_positions = block.positions();
    let triples = beta_next.image_triples(block);
    let block_ok: Vec<bool> = triples
        .iter()
        .map(|t| {
            let pairs = [(0, 1), (1, 2), (0, 2)];
            pairs.iter().all(|&(x, y)| {
                g.has_edge(
                    arrangement.vertex_at(new_positions[x]),
                    arrangement.vertex_at(new_positions[y]),
                ) == h.has_edge(t[x], t[y])
            })
        })
        .collect();

    let mut gamma = 0usize;
    let mut alpha = Vec::new();
    let mut used = vec![false; h.n()];
    for carrier in state.carriers() {
        if !consistent(&carrier, g, h, arrangement) {
            // Only compressed-mode carriers `s ∘ σ0` can fail here; their
            // products are still counted in γ.
            gamma += triples
                .iter()
                .filter(|t| t.iter().all(|&v| !carrier.values().any(|u| u == v)))
                .count();
            continue;
        }
        used.iter_mut().for_each(|u| *u = false);
        for v in carrier.values() {
            used[v] = true;
        }
        let sig = Signatures::new(&carrier, new_positions, g, h, arrangement);
        for (t, &ok) in triples.iter().zip(&block_ok) {
            if t.iter().any(|&v| used[v]) {
                continue;
            }
            gamma += 1;
            if gamma > state.cap {
                diagnostics.gamma_sizes.push(gamma);
                diagnostics.budget_limited = true;
                return Err(PipelineError::CapExceeded {
                    step,
                    cap: state.cap,
                    diagnostics: Box::new(diagnostics),
                });
            }
            if ok && (0..3).all(|x| sig.matches(x, t[x])) {
                let pi = PartialMap::new(new_positions.iter().copied().zip(t.iter().copied()).collect())
                    .expect("triangle vertices are distinct");
                let product = direct_product(&carrier, &pi)
                    .expect("blocks are disjoint")
                    .expect("collisions filtered above");
                debug_assert!(consistent(&product, g, h, arrangement));
                alpha.push(product);
            }
        }
    }
    diagnostics.gamma_sizes.push(gamma);
    diagnostics.alpha_sizes.push(alpha.len());

    if alpha.is_empty() {
        return Ok(Outcome::NoWitnessFound(diagnostics));
    }

    let mut next = State {
        t: step,
        covered_blocks: state.covered_blocks + 1,
        mode: state.mode,
        exact_maps: Vec::new(),
        representative: None,
        gens: GenSet::new(h.n()),
        cap: state.cap,
        diagnostics,
    };
    match state.mode {
        Mode::Exact => next.exact_maps = alpha,
        Mode::Compressed => {
            let (sigma0, gens) = compress(&alpha, h.n());
            next.diagnostics.gen_sizes.push(gens.len());
            next.representative = Some(sigma0);
            next.gens = gens;
        }
    }
    Ok(Outcome::Alive(next))
}

/// Factors `alpha` as `σ0` plus generators `s` with `s ∘ σ0` equal to the
/// other members. Each `s` agrees with `σ ∘ σ0⁻¹` on the image of `σ0` and
/// pairs up the remaining vertices in increasing order.
pub fn compress(alpha: &[PartialMap], n: usize) -> (PartialMap, GenSet) {
    let sigma0 = alpha[0].clone();
    let carried: Vec<Permutation> = alpha
        .iter()
        .map(|sigma| vertex_permutation_between(&sigma0, sigma, n))
        .collect();
    let gens = reduce_generators(&carried, n).expect("all permutations have size n");
    (sigma0, gens)
}

/// A permutation `s` of `0..n` with `s(from(p)) = to(p)` for every position.
pub fn vertex_permutation_between(from: &PartialMap, to: &PartialMap, n: usize) -> Permutation {
    debug_assert!(from.same_support(to));
    let mut images = vec![usize::MAX; n];
    let mut used_src = vec![false; n];
    let mut used_dst = vec![false; n];
    for (&(_, x), &(_, y)) in from.entries().iter().zip(to.entries()) {
        images[x] = y;
        used_src[x] = true;
        used_dst[y] = true;
    }
    let free_dst = (0..n).filter(|&y| !used_dst[y]);
    for (x, y) in (0..n).filter(|&x| !used_src[x]).zip(free_dst) {
        images[x] = y;
    }
    Permutation::from_images(images).expect("bijection by construction")
}

/// Turns a full-support map (position `p ↦` vertex of `H`) into `P` with
/// `P(φ(p)) = w[p]`, so that `H^P = G` when the map is consistent.
pub fn totalize(phi: &PartialMap, arrangement: &Arrangement) -> Option<Permutation> {
    if phi.len() != arrangement.n {
        return None;
    }
    let mut images = vec![usize::MAX; arrangement.n];
    for &(p, v) in phi.entries() {
        images[v] = arrangement.vertex_at(p);
    }
    Permutation::from_images(images).ok()
}

/// Result of running every block of one arrangement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunResult {
    Complete(State),
    NoWitnessFound(Diagnostics),
}

/// Runs iterations `1..x` over a fixed arrangement. For a single block the
/// (already consistent) `β_1` is the final state.
pub fn run_arrangement(
    g: &Graph,
    h: &Graph,
    arrangement: &Arrangement,
    cache: &CandidateCache,
    mode: Mode,
    cap: usize,
    deadline: Option<Instant>,
) -> Result<RunResult, PipelineError> {
    check_sizes(g, h, arrangement)?;
    let beta_1 = cache.beta(arrangement.block(1).map_err(infeasible_from)?);
    if beta_1.is_empty() {
        let mut d = Diagnostics {
            mode,
            ..Diagnostics::default()
        };
        d.beta_sizes.push(0);
        return Ok(RunResult::NoWitnessFound(d));
    }
    let mut state = first_block_state(&beta_1, mode, cap);
    if arrangement.x() == 1 {
        state.exact_maps = consistency_filter(&state.exact_maps, g, h, arrangement)?;
        if mode == Mode::Compressed {
            let (sigma0, gens) = compress(&state.exact_maps, h.n());
            state.diagnostics.gen_sizes.push(gens.len());
            state.representative = Some(sigma0);
            state.gens = gens;
        }
        return Ok(RunResult::Complete(state));
    }
    for block in &arrangement.blocks[1..] {
        if deadline.is_some_and(|d| Instant::now() > d) {
            return Err(PipelineError::CapExceeded {
                step: state.t + 1,
                cap: state.cap,
                diagnostics: Box::new(Diagnostics {
                    budget_limited: true,
                    ..state.diagnostics
                }),
            });
        }
        let beta = cache.beta(block);
        match extend(state, &beta, g, h, arrangement)? {
            Outcome::Alive(next) => state = next,
            Outcome::NoWitnessFound(d) => return Ok(RunResult::NoWitnessFound(d)),
        }
    }
    Ok(RunResult::Complete(state))
}

fn infeasible_from(e: RearrangeError) -> PipelineError {
    match e {
        RearrangeError::Infeasible(i) => PipelineError::Infeasible(i),
        _ => PipelineError::Infeasible(Infeasible::NoTriangleBlock { at_block: 1 }),
    }
}

/// Generators of the automorphisms the pipeline finds when `H := G`.
///
/// In exact mode the closure is all of `Aut(G)`. In compressed mode it is a
/// subgroup (possibly trivial, possibly empty when the carried
/// representative fails to extend).
pub fn automorphism_generators(
    g: &Graph,
    arrangement: &Arrangement,
    mode: Mode,
    cap: usize,
) -> Result<GenSet, PipelineError> {
    let cache = CandidateCache::new(g);
    let state = match run_arrangement(g, g, arrangement, &cache, mode, cap, None)? {
        RunResult::Complete(s) => s,
        RunResult::NoWitnessFound(_) => return Ok(GenSet::new(g.n())),
    };
    let survivors: Vec<PartialMap> = match mode {
        Mode::Exact => state.exact_maps,
        Mode::Compressed => state.carriers(),
    };
    let autos: Vec<Permutation> = survivors
        .iter()
        .filter(|m| consistent(m, g, g, arrangement))
        .filter_map(|m| totalize(m, arrangement))
        .collect();
    let mut gens = reduce_generators(&autos, g.n()).expect("uniform size");
    gens.representative = autos.first().cloned();
    Ok(gens)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    VertexCountMismatch,
    EdgeCountMismatch,
    DegreeMultisetMismatch,
    /// `H` has no triangle, so no block has a candidate.
    NoCandidates,
    SearchExhausted,
    BudgetLimited,
    NotDivisibleBy3,
    NoTriangleBlock,
    WitnessVerificationFailed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VerdictKind {
    IsomorphicWitness { witness: Permutation },
    NoWitnessFound,
    Infeasible { infeasible: Infeasible },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub schema: u32,
    #[serde(flatten)]
    pub kind: VerdictKind,
    pub reasons: Vec<Reason>,
    /// True when the verdict is a certificate: a verified witness, or a
    /// rejection by an isomorphism invariant.
    pub conclusive: bool,
    pub diagnostics: Diagnostics,
}

impl Verdict {
    fn new(kind: VerdictKind, reasons: Vec<Reason>, conclusive: bool, diagnostics: Diagnostics) -> Self {
        Verdict {
            schema: 1,
            kind,
            reasons,
            conclusive,
            diagnostics,
        }
    }

    pub fn witness(&self) -> Option<&Permutation> {
        match &self.kind {
            VerdictKind::IsomorphicWitness { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn is_witness(&self) -> bool {
        self.witness().is_some()
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self.kind, VerdictKind::Infeasible { .. })
    }

    /// Rejected by vertex count, edge count or degree multiset.
    pub fn is_precheck_rejection(&self) -> bool {
        matches!(self.kind, VerdictKind::NoWitnessFound)
            && self.reasons.iter().any(|r| {
                matches!(
                    r,
                    Reason::VertexCountMismatch | Reason::EdgeCountMismatch | Reason::DegreeMultisetMismatch
                )
            })
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            VerdictKind::IsomorphicWitness { .. } => "isomorphic-witness",
            VerdictKind::NoWitnessFound => "no-witness-found",
            VerdictKind::Infeasible { .. } => "infeasible",
        }
    }
}

/// Checks `H^P = G` edge by edge, without building `H^P`.
pub fn verify_witness(g: &Graph, h: &Graph, p: &Permutation) -> bool {
    if p.len() != g.n() || g.n() != h.n() || g.edge_count() != h.edge_count() {
        return false;
    }
    h.edges()
        .into_iter()
        .all(|(u, v)| g.has_edge(p.apply(u), p.apply(v)))
}

/// Vertex-count, edge-count and degree-multiset invariants; every one that
/// fails is listed.
pub fn precheck(g: &Graph, h: &Graph) -> Vec<Reason> {
    if g.n() != h.n() {
        return vec![Reason::VertexCountMismatch];
    }
    let mut reasons = Vec::new();
    if g.edge_count() != h.edge_count() {
        reasons.push(Reason::EdgeCountMismatch);
    }
    if g.degree_multiset() != h.degree_multiset() {
        reasons.push(Reason::DegreeMultisetMismatch);
    }
    reasons
}

fn attempt_policy(options: &Options, attempt: usize, n: usize) -> (usize, TieBreak) {
    let base = options.seed_vertex % n;
    if attempt == 0 {
        (base, TieBreak::LowestId)
    } else {
        let mixed = options
            .seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(attempt as u64);
        ((base + attempt) % n, TieBreak::Shuffled(mixed))
    }
}

/// Decides whether `H ≅ G` by searching for a witness `P` with `H^P = G`.
///
/// Exact mode enumerates every consistent full map, which does not depend on
/// the arrangement, so it only retries other arrangements after hitting the
/// cap. Compressed mode retries up to `retry_budget` arrangements.
pub fn decide(g: &Graph, h: &Graph, options: &Options) -> Verdict {
    let mut diagnostics = Diagnostics {
        mode: options.mode,
        ..Diagnostics::default()
    };
    let rejections = precheck(g, h);
    if !rejections.is_empty() {
        return Verdict::new(VerdictKind::NoWitnessFound, rejections, true, diagnostics);
    }

    let n = g.n();
    let first = if n == 0 {
        Err(RearrangeError::Infeasible(Infeasible::NotDivisibleBy3 { n }))
    } else {
        let (seed, policy) = attempt_policy(options, 0, n);
        rearrange(g, seed, policy)
    };
    let first = match first {
        Ok(a) => a,
        Err(RearrangeError::Infeasible(inf)) => {
            let reason = match inf {
                Infeasible::NotDivisibleBy3 { .. } => Reason::NotDivisibleBy3,
                Infeasible::NoTriangleBlock { .. } => Reason::NoTriangleBlock,
            };
            return Verdict::new(
                VerdictKind::Infeasible { infeasible: inf },
                vec![reason],
                false,
                diagnostics,
            );
        }
        Err(e) => unreachable!("seed is reduced modulo n: {e}"),
    };

    let cache = CandidateCache::new(h);
    if cache.ordered_triangle_count() == 0 {
        diagnostics.beta_sizes = vec![0; first.x()];
        return Verdict::new(
            VerdictKind::NoWitnessFound,
            vec![Reason::NoCandidates],
            false,
            diagnostics,
        );
    }

    let deadline = options
        .timeout_ms
        .map(|ms| Instant::now() + Duration::from_millis(ms));
    let budget = options.retry_budget.max(1);
    let mut budget_limited = false;
    let mut verification_failed = false;

    for attempt in 0..budget {
        let arrangement = if attempt == 0 {
            first.clone()
        } else {
            let (seed, policy) = attempt_policy(options, attempt, n);
            rearrange(g, seed, policy).expect("a tiling exists, so every seed succeeds")
        };
        let run = run_arrangement(g, h, &arrangement, &cache, options.mode, options.cap, deadline);
        let mut limited_here = false;
        match run {
            Ok(RunResult::Complete(state)) => {
                diagnostics = state.diagnostics.clone();
                let candidate = state
                    .first_survivor()
                    .filter(|m| consistent(m, g, h, &arrangement))
                    .and_then(|m| totalize(m, &arrangement));
                if let Some(p) = candidate {
                    let rebuilt_ok = h.apply_permutation(&p).is_ok_and(|hp| &hp == g);
                    if rebuilt_ok && verify_witness(g, h, &p) {
                        diagnostics.budget_used = attempt + 1;
                        diagnostics.budget_limited = budget_limited;
                        return Verdict::new(
                            VerdictKind::IsomorphicWitness { witness: p },
                            Vec::new(),
                            true,
                            diagnostics,
                        );
                    }
                    verification_failed = true;
                }
            }
            Ok(RunResult::NoWitnessFound(d)) => diagnostics = d,
            Err(PipelineError::CapExceeded { diagnostics: d, .. }) => {
                diagnostics = *d;
                budget_limited = true;
                limited_here = true;
            }
            Err(e) => unreachable!("pipeline invariant violated: {e}"),
        }
        diagnostics.budget_used = attempt + 1;
        if deadline.is_some_and(|d| Instant::now() > d) {
            budget_limited = true;
            break;
        }
        if options.mode == Mode::Exact && !limited_here {
            break;
        }
    }

    diagnostics.budget_limited = budget_limited;
    let mut reasons = vec![if budget_limited {
        Reason::BudgetLimited
    } else {
        Reason::SearchExhausted
    }];
    if verification_failed {
        reasons.push(Reason::WitnessVerificationFailed);
    }
    Verdict::new(VerdictKind::NoWitnessFound, reasons, false, diagnostics)
}
