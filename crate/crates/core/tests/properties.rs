//! Property suites for the spec invariants: parsing round trips, reduction
//! idempotence, power decomposition arithmetic, canonical-key invariance
//! under storage permutations, and folding.

use proptest::prelude::*;
use word_measures::graphs::{fold, gamma_power, CoreGraph, GeomEdge};
use word_measures::oracle::{exact_expectation_sn, ClassFn};
use word_measures::session::Session;
use word_measures::words::{parse_word, Word};

fn word_strategy(max_len: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(proptest::sample::select(vec!['a', 'b', 'A', 'B']), 0..max_len)
        .prop_map(|cs| cs.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_print_roundtrip(text in word_strategy(12)) {
        let w = parse_word(&text, 2).unwrap();
        let reparsed = parse_word(&w.to_string(), 2).unwrap();
        prop_assert_eq!(&reparsed, &w);
        // Reduction is idempotent: re-feeding the letters changes nothing.
        let again = Word::from_letters(w.letters().iter().copied(), 2).unwrap();
        prop_assert_eq!(again, w);
    }

    #[test]
    fn cyclic_core_is_no_longer(text in word_strategy(12)) {
        let w = parse_word(&text, 2).unwrap();
        let (core, conj) = w.cyclic_reduce();
        prop_assert!(core.len() <= w.len());
        prop_assert_eq!(core.len() == w.len(), w.is_cyclically_reduced());
        let rebuilt = conj.concat(&core).concat(&conj.inverse());
        prop_assert_eq!(rebuilt, w);
    }

    #[test]
    fn power_exponent_is_multiple(text in word_strategy(6), k in 1u32..4) {
        let u = parse_word(&text, 2).unwrap();
        if !u.is_identity() && !u.pow(k).is_identity() {
            let d = u.pow(k).power_decomposition().unwrap();
            prop_assert_eq!(d.exponent % k, 0);
        }
    }

    #[test]
    fn canonical_key_storage_invariance(
        text in word_strategy(8),
        shape in proptest::collection::vec(1usize..3, 1..3),
        perm_seed in 0u64..1000,
    ) {
        let w = parse_word(&text, 2).unwrap();
        let gp = gamma_power(&w, &shape);
        let g = gp.graph.as_ref();
        if g.n_vertices() > 1 {
            // deterministic pseudo-shuffle of vertex names and edge order
            let n = g.n_vertices();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut state = perm_seed;
            for i in (1..n).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                let j = (state >> 33) as usize % (i + 1);
                perm.swap(i, j);
            }
            let mut edges: Vec<GeomEdge> = g
                .geom_edges()
                .iter()
                .map(|e| GeomEdge { src: perm[e.src], dst: perm[e.dst], label: e.label })
                .collect();
            edges.reverse();
            let h = CoreGraph::new(g.rank(), n, edges);
            prop_assert_eq!(g.canonical_key(), h.canonical_key());
        }
    }

    #[test]
    fn fold_is_idempotent_and_immersive(
        n in 1usize..5,
        edges in proptest::collection::vec((0usize..5, 0usize..5, 1u32..3), 1..8),
    ) {
        let edges: Vec<GeomEdge> = edges
            .into_iter()
            .map(|(s, d, l)| GeomEdge { src: s % n, dst: d % n, label: l })
            .collect();
        let raw = CoreGraph::new(2, n, edges);
        let (folded, quo) = fold(&raw);
        prop_assert!(folded.is_folded());
        prop_assert!(quo.is_surjective());
        let (again, q2) = fold(&folded);
        prop_assert!(q2.is_isomorphism());
        prop_assert!(again.isomorphic(&folded));
    }

    #[test]
    fn gamma_power_is_union_of_cycles(text in word_strategy(6), shape in proptest::collection::vec(1usize..4, 1..3)) {
        let w = parse_word(&text, 2).unwrap();
        let gp = gamma_power(&w, &shape);
        if !gp.graph.is_empty() {
            prop_assert_eq!(gp.graph.euler_characteristic(), 0);
            prop_assert!(gp.graph.is_union_of_cycles());
            prop_assert_eq!(gp.graph.components().len(), shape.len());
        }
    }
}

/// Word-measure invariance under conjugation and inversion (exact oracle).
#[test]
fn expectation_invariant_under_conjugation_and_inversion() {
    let s = Session::new();
    for text in ["ab", "abAB", "aab", "abb"] {
        let base = parse_word(text, 2).unwrap();
        let conj = parse_word("b", 2)
            .unwrap()
            .concat(&base)
            .concat(&parse_word("B", 2).unwrap());
        let inv = base.inverse();
        let v0 = exact_expectation_sn(std::slice::from_ref(&base), &ClassFn::Fix, 3, &s).unwrap();
        let v1 = exact_expectation_sn(std::slice::from_ref(&conj), &ClassFn::Fix, 3, &s).unwrap();
        let v2 = exact_expectation_sn(std::slice::from_ref(&inv), &ClassFn::Fix, 3, &s).unwrap();
        assert_eq!(v0, v1, "conjugation, w = {text}");
        assert_eq!(v0, v2, "inversion, w = {text}");
    }
}
