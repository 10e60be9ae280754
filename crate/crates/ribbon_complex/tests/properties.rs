use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use ribbon_complex::cyclic_lie::*;
use ribbon_complex::graph_complex::*;
use ribbon_complex::ribbon_graph::{GraphKey, RibbonGraph};
use ribbon_complex::super_core::*;
use std::sync::OnceLock;

fn keys() -> &'static Vec<GraphKey> {
    static KEYS: OnceLock<Vec<GraphKey>> = OnceLock::new();
    KEYS.get_or_init(|| GraphBasis::enumerate(5).keys().cloned().collect())
}

/// Random fully ordered representative with fresh half-edge ids and its sign.
fn scramble(g: &RibbonGraph, seed: u64) -> (RibbonGraph, i32) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..g.vertices.len()).collect();
    order.shuffle(&mut rng);
    let (mut h, mut sign) = g.reorder_vertices(&order);
    for v in h.vertices.iter_mut() {
        let r = rng.gen_range(0..v.len());
        v.rotate_left(r);
    }
    h.edges.shuffle(&mut rng);
    for e in h.edges.iter_mut() {
        if rng.gen_bool(0.5) {
            *e = (e.1, e.0);
            sign = -sign;
        }
    }
    let mut ids: Vec<usize> = (0..h.half_edge_count()).collect();
    ids.shuffle(&mut rng);
    let relabel = RibbonGraph {
        vertices: h.vertices.iter().map(|v| v.iter().map(|&x| ids[x]).collect()).collect(),
        edges: h.edges.iter().map(|&(a, b)| (ids[a], ids[b])).collect(),
    };
    (relabel, sign)
}

fn perm_strategy(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<usize>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_is_a_class_invariant(i in 0usize..10_000, seed in any::<u64>()) {
        let k = &keys()[i % keys().len()];
        let (g, sign) = scramble(&k.to_graph(), seed);
        let c = g.canonical();
        prop_assert!(!c.zero);
        prop_assert_eq!(&c.key, k);
        prop_assert_eq!(c.sign, sign);
    }

    #[test]
    fn boundary_of_boundary_vanishes(i in 0usize..10_000) {
        let k = &keys()[i % keys().len()];
        prop_assert!(boundary(&boundary(&GraphChain::basis(k.clone()))).is_zero());
    }

    #[test]
    fn coboundary_is_adjoint_to_boundary(i in 0usize..10_000, j in 0usize..10_000) {
        let (a, b) = (&keys()[i % keys().len()], &keys()[j % keys().len()]);
        let (ga, gb) = (GraphChain::basis(a.clone()), GraphChain::basis(b.clone()));
        prop_assert_eq!(pairing(&boundary(&ga), &gb), pairing(&ga, &coboundary(&gb)));
    }

    #[test]
    fn permutation_signs_are_multiplicative(a in perm_strategy(6), b in perm_strategy(6)) {
        prop_assert_eq!(perm_sign(&perm_compose(&a, &b)), perm_sign(&a) * perm_sign(&b));
        prop_assert_eq!(perm_compose(&a, &perm_inverse(&a)), (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn koszul_sign_is_symmetric_in_even_factors(p in perm_strategy(5)) {
        let even = [false; 5];
        prop_assert_eq!(koszul_sign(&p, &even).unwrap(), 1);
        let odd = [true; 5];
        prop_assert_eq!(koszul_sign(&p, &odd).unwrap(), perm_sign(&p));
    }

    #[test]
    fn rationals_roundtrip(n in -1000i64..1000, d in 1i64..1000) {
        let q = qr(n, d);
        prop_assert_eq!(parse_q(&fmt_q(&q)).unwrap(), q);
    }

    #[test]
    fn chevalley_eilenberg_differential_squares_to_zero(seed in any::<u64>()) {
        let s = SymplecticSpace::canonical(1, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = random_chain(&s, &mut rng, 3, 3, 8);
        prop_assert!(differential(&s, &differential(&s, &x)).is_zero());
    }

    #[test]
    fn bracket_is_graded_antisymmetric(a in prop::collection::vec(0u16..3, 1..4), b in prop::collection::vec(0u16..3, 1..4)) {
        let s = SymplecticSpace::canonical(1, 1);
        let (mut f, mut g) = (CyclicPoly::default(), CyclicPoly::default());
        f.add_word(&s, &a, qi(1));
        g.add_word(&s, &b, qi(1));
        let sign = if s.word_parity(&a) && s.word_parity(&b) { qi(1) } else { qi(-1) };
        prop_assert_eq!(s.bracket(&f, &g), s.bracket(&g, &f).scaled(&sign));
    }

    #[test]
    fn amplitude_is_independent_of_representative(i in 0usize..10_000, seed in any::<u64>()) {
        let s = SymplecticSpace::canonical(1, 2);
        let k = &keys()[i % keys().len()];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = random_chain(&s, &mut rng, 3, k.vertices().max(1), 2 * k.edges());
        let (g, sign) = scramble(&k.to_graph(), seed);
        prop_assert_eq!(feynman(&s, &x, &g), feynman(&s, &x, &k.to_graph()) * qi(sign as i64));
    }
}

#[test]
fn scramble_reaches_other_representatives() {
    let k = keys().iter().find(|k| k.edges() == 4 && k.vertices() == 2).unwrap();
    let distinct = (0..20).map(|s| scramble(&k.to_graph(), s).0.normalized()).filter(|g| *g != k.to_graph()).count();
    assert!(distinct > 0);
}
