use proptest::prelude::*;

use triblock::candidates::CandidateCache;
use triblock::oracle;
use triblock::permgroup::{closure, direct_product, reduce_generators, PartialMap};
use triblock::pipeline::{decide, run_arrangement, Mode, Options, RunResult};
use triblock::rearrange::{rearrange, TieBreak};
use triblock::{Graph, Permutation};

fn perm(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::from_images(v).unwrap())
}

fn graph(n: usize, density: f64) -> impl Strategy<Value = Graph> {
    proptest::collection::vec(proptest::bool::weighted(density), n * (n - 1) / 2).prop_map(move |bits| {
        let mut it = bits.into_iter();
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if it.next().unwrap() {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n, &edges).unwrap()
    })
}

/// A graph on `n` vertices (a multiple of 3) tiled by the triangles
/// `{0,1,2}, {3,4,5}, ...` with random extra edges, relabelled by `p`.
fn tiled(n: usize) -> impl Strategy<Value = Graph> {
    (graph(n, 0.35), perm(n)).prop_map(move |(extra, p)| {
        let mut edges = extra.edges();
        for b in (0..n).step_by(3) {
            edges.extend([(b, b + 1), (b + 1, b + 2), (b, b + 2)]);
        }
        edges.sort();
        edges.dedup();
        Graph::from_edges(n, &edges).unwrap().apply_permutation(&p).unwrap()
    })
}

/// An injective map from up to three of the positions `first..first + 6`
/// into `values - 20..values`.
fn partial_map(first: usize, values: usize) -> impl Strategy<Value = PartialMap> {
    (1usize..4).prop_flat_map(move |k| {
        (
            proptest::sample::subsequence((first..first + 6).collect::<Vec<_>>(), k),
            proptest::sample::subsequence((values - 20..values).collect::<Vec<_>>(), k).prop_shuffle(),
        )
            .prop_map(|(ps, vs)| PartialMap::new(ps.into_iter().zip(vs).collect()).unwrap())
    })
}

fn sized_perm() -> impl Strategy<Value = Permutation> {
    (1usize..12).prop_flat_map(perm)
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn inverse_cancels(p in sized_perm()) {
        let n = p.len();
        prop_assert_eq!(p.compose(&p.inverse()).unwrap(), Permutation::identity(n));
        prop_assert_eq!(p.inverse().compose(&p).unwrap(), Permutation::identity(n));
    }

    #[test]
    fn cycle_notation_round_trips(p in sized_perm()) {
        prop_assert_eq!(Permutation::from_cycles(p.len(), &p.to_cycles()).unwrap(), p);
    }

    #[test]
    fn relabelling_preserves_invariants((g, p) in (2usize..10).prop_flat_map(|n| (graph(n, 0.4), perm(n)))) {
        let h = g.apply_permutation(&p).unwrap();
        prop_assert_eq!(h.degree_multiset(), g.degree_multiset());
        prop_assert_eq!(h.edge_count(), g.edge_count());
        prop_assert_eq!(h.apply_permutation(&p.inverse()).unwrap(), g.clone());
        for (u, v) in g.edges() {
            prop_assert!(h.has_edge(p.apply(u), p.apply(v)));
        }
    }

    #[test]
    fn edge_list_round_trips(g in (1usize..12).prop_flat_map(|n| graph(n, 0.3))) {
        let text = g.to_edge_list();
        prop_assert_eq!(triblock::parse_edge_list(text.as_bytes()).unwrap(), g);
    }

    #[test]
    fn reduction_preserves_the_group(
        gens in (2usize..7).prop_flat_map(|n| proptest::collection::vec(perm(n), 1..6))
    ) {
        let n = gens[0].len();
        let reduced = reduce_generators(&gens, n).unwrap();
        prop_assert!(reduced.len() < n);
        let log2_fact: f64 = (2..=n).map(|k| (k as f64).log2()).sum();
        prop_assert!(reduced.len() as f64 <= log2_fact);
        for g in &reduced.generators {
            prop_assert!(!g.is_identity());
        }
        let original = triblock::GenSet::from_generators(n, gens.clone()).unwrap();
        prop_assert_eq!(closure(&reduced, 5040), closure(&original, 5040));
    }

    #[test]
    fn direct_product_restricts_back((a, b) in (partial_map(0, 20), partial_map(6, 40))) {
        let ab = direct_product(&a, &b).unwrap().expect("disjoint values");
        prop_assert_eq!(ab.restrict(|p| p < 6), a.clone());
        prop_assert_eq!(ab.restrict(|p| p >= 6), b.clone());
        prop_assert_eq!(direct_product(&b, &a).unwrap(), Some(ab));
        prop_assert!(direct_product(&a, &a).is_err());
    }

    #[test]
    fn oracle_is_symmetric((g, h) in (3usize..8).prop_flat_map(|n| (graph(n, 0.5), graph(n, 0.5)))) {
        let gh = oracle::brute_force_isomorphism(&g, &h, false).unwrap();
        let hg = oracle::brute_force_isomorphism(&h, &g, false).unwrap();
        prop_assert_eq!(gh.is_isomorphic(), hg.is_isomorphic());
        if let Some(p) = gh.witness {
            prop_assert_eq!(h.apply_permutation(&p).unwrap(), g);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(24) })]

    #[test]
    fn every_isomorphism_restricts_into_beta((g, p) in prop_oneof![Just(6usize), Just(9)].prop_flat_map(|n| (tiled(n), perm(n)))) {
        let h = g.apply_permutation(&p).unwrap();
        let a = rearrange(&g, 0, TieBreak::LowestId).unwrap();
        let cache = CandidateCache::new(&h);
        let isos = oracle::all_isomorphisms(&g, &h).unwrap();
        prop_assert!(!isos.is_empty());
        for iso in &isos {
            // `iso` maps H onto G; position p carries w[p], whose preimage is in H.
            let back = iso.inverse();
            for block in &a.blocks {
                let beta = cache.beta(block);
                let restricted = PartialMap::new(
                    block.positions().iter().map(|&q| (q, back.apply(a.vertex_at(q)))).collect(),
                ).unwrap();
                prop_assert!(beta.maps.contains(&restricted));
            }
        }

        // Exact mode keeps every isomorphism to the end.
        match run_arrangement(&g, &h, &a, &cache, Mode::Exact, 1_000_000, None).unwrap() {
            RunResult::Complete(state) => prop_assert_eq!(state.exact_maps.len(), isos.len()),
            RunResult::NoWitnessFound(d) => prop_assert!(false, "exact run died: {:?}", d),
        }
    }

    #[test]
    fn rearrange_success_implies_a_tiling(g in prop_oneof![Just(6usize), Just(9)].prop_flat_map(|n| graph(n, 0.5))) {
        for seed in 0..g.n() {
            if rearrange(&g, seed, TieBreak::LowestId).is_ok() {
                prop_assert!(oracle::triangle_partition_exists(&g));
            }
        }
        prop_assert_eq!(
            rearrange(&g, 0, TieBreak::LowestId).is_ok(),
            oracle::triangle_partition_exists(&g)
        );
    }

    #[test]
    fn witnesses_always_verify((g, p) in prop_oneof![Just(6usize), Just(9)].prop_flat_map(|n| (tiled(n), perm(n)))) {
        let h = g.apply_permutation(&p).unwrap();
        for mode in [Mode::Exact, Mode::Compressed] {
            let v = decide(&g, &h, &Options::with_mode(mode));
            if let Some(w) = v.witness() {
                prop_assert_eq!(h.apply_permutation(w).unwrap(), g.clone());
            }
            if mode == Mode::Exact {
                prop_assert!(v.is_witness());
            }
        }
    }
}
