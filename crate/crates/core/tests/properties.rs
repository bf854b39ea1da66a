mod support;

use kcut::{BalanceFunction, BalanceKind, Graph, VertexSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Case {
    graph: Graph,
    set: Vec<bool>,
    other: Vec<bool>,
    f: Vec<f64>,
    g: Vec<f64>,
    k: usize,
}

fn case(seed: u64, n: usize) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = support::random_connected_graph(&mut rng, n, 0.3, false);
    let set = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let other = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    // Coarse values so that ties occur.
    let f = (0..n).map(|_| (rng.gen_range(-4..=4) as f64) * 0.25).collect();
    let g = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let k = rng.gen_range(2..=n.min(5));
    Case { graph, set, other, f, g, k }
}

fn set(mask: &[bool]) -> VertexSet {
    VertexSet::from_mask(mask.to_vec())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cut_is_symmetric_and_equals_tv_of_indicator(seed in any::<u64>(), n in 2usize..=14) {
        let c = case(seed, n);
        let s = set(&c.set);
        prop_assert_eq!(c.graph.cut_value(&s), c.graph.cut_value(&s.complement()));
        prop_assert!(close(c.graph.cut_value(&s), support::cut(&c.graph, &c.set), 1e-12));
        prop_assert!(close(c.graph.total_variation(&s.indicator()).unwrap(), c.graph.cut_value(&s), 1e-12));
    }

    #[test]
    fn total_variation_is_shift_invariant_and_homogeneous(seed in any::<u64>(), n in 2usize..=14, shift in -3.0f64..3.0, scale in 0.0f64..5.0) {
        let c = case(seed, n);
        let tv = c.graph.total_variation(&c.g).unwrap();
        prop_assert!(close(tv, support::total_variation(&c.graph, &c.g), 1e-12));
        let shifted: Vec<f64> = c.g.iter().map(|x| x + shift).collect();
        prop_assert!(close(c.graph.total_variation(&shifted).unwrap(), tv, 1e-10));
        let scaled: Vec<f64> = c.g.iter().map(|x| x * scale).collect();
        prop_assert!(close(c.graph.total_variation(&scaled).unwrap(), scale * tv, 1e-10));
    }

    #[test]
    fn set_values_match_definitions_and_are_submodular(seed in any::<u64>(), n in 2usize..=14) {
        let c = case(seed, n);
        let union: Vec<bool> = c.set.iter().zip(&c.other).map(|(a, b)| *a || *b).collect();
        let inter: Vec<bool> = c.set.iter().zip(&c.other).map(|(a, b)| *a && *b).collect();
        for kind in BalanceKind::ALL {
            let bf = BalanceFunction::new(kind, c.k, &c.graph).unwrap();
            let v = |m: &[bool]| bf.set_value(&set(m));
            prop_assert!(close(v(&c.set), support::set_balance(kind, c.k, &c.graph, &c.set), 1e-12));
            prop_assert!(v(&c.set) + v(&c.other) >= v(&union) + v(&inter) - 1e-9, "{kind} not submodular");
        }
    }

    #[test]
    fn lovasz_extension_identities(seed in any::<u64>(), n in 2usize..=14) {
        let c = case(seed, n);
        for kind in BalanceKind::ALL {
            let bf = BalanceFunction::new(kind, c.k, &c.graph).unwrap();
            let s_f = bf.lovasz_value(&c.f).unwrap();
            prop_assert_eq!(bf.lovasz_value(&set(&c.set).indicator()).unwrap(), bf.set_value(&set(&c.set)));
            prop_assert!(close(s_f, support::lovasz(kind, c.k, &c.graph, &c.f), 1e-10), "{kind}");

            let sub = bf.subgradient(&c.f).unwrap();
            let inner: f64 = sub.iter().zip(&c.f).map(|(a, b)| a * b).sum();
            prop_assert!(close(inner, s_f, 1e-10));
            let at_g: f64 = sub.iter().zip(&c.g).map(|(a, b)| a * b).sum();
            prop_assert!(bf.lovasz_value(&c.g).unwrap() >= at_g - 1e-10);

            let mid: Vec<f64> = c.f.iter().zip(&c.g).map(|(a, b)| 0.5 * (a + b)).collect();
            let s_mid = bf.lovasz_value(&mid).unwrap();
            prop_assert!(s_mid <= 0.5 * (s_f + bf.lovasz_value(&c.g).unwrap()) + 1e-10, "{kind} not convex");
        }
    }

    #[test]
    fn symmetric_kinds_ignore_constant_shifts(seed in any::<u64>(), n in 2usize..=14, shift in -3.0f64..3.0) {
        let c = case(seed, n);
        let shifted: Vec<f64> = c.g.iter().map(|x| x + shift).collect();
        for kind in BalanceKind::ALL {
            let bf = BalanceFunction::new(kind, c.k, &c.graph).unwrap();
            let (a, b) = (bf.lovasz_value(&c.g).unwrap(), bf.lovasz_value(&shifted).unwrap());
            if kind.is_symmetric() || kind.is_asymmetric_cheeger() {
                prop_assert!(close(a, b, 1e-10), "{kind}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn closed_form_bounds_hold_on_valid_partitions(seed in any::<u64>(), n in 3usize..=10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = support::random_connected_graph(&mut rng, n, 0.3, false);
        let k = rng.gen_range(2..=n);
        let mut assign: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.gen_range(0..k) }).collect();
        for i in (1..n).rev() {
            assign.swap(i, rng.gen_range(0..=i));
        }
        for kind in BalanceKind::ALL {
            let bf = BalanceFunction::new(kind, k, &graph).unwrap();
            for c in 0..k {
                let v = bf.cluster_value(&assign, c);
                prop_assert!(v >= bf.min_value() * (1.0 - 1e-12), "{kind}: {v} < m = {}", bf.min_value());
                prop_assert!(v <= bf.max_value() * (1.0 + 1e-12), "{kind}: {v} > M = {}", bf.max_value());
            }
        }
    }
}
