//! Property-based invariants over randomized inputs.

use ggm_eval::descriptors::Histogram;
use ggm_eval::generators::{gen_er, rewire_preserving_degree};
use ggm_eval::graph::{connected_components, Graph};
use ggm_eval::mmd::{mmd_squared, DescriptorValue, KernelKind, KernelSpec};
use proptest::prelude::*;

proptest! {
    #[test]
    fn canonicalization_invariants(
        pairs in proptest::collection::vec((0i64..40, 0i64..40), 0..120),
    ) {
        let g = Graph::from_edge_list(&pairs, None).unwrap();
        // no self-loops, stored once with u < v, sorted
        let mut prev = None;
        for &(u, v) in g.edges() {
            prop_assert!(u < v);
            if let Some(p) = prev {
                prop_assert!(p < (u, v));
            }
            prev = Some((u, v));
        }
        // handshake
        let degree_sum: usize = (0..g.node_count()).map(|v| g.degree(v)).sum();
        prop_assert_eq!(degree_sum, 2 * g.edge_count());
        // adjacency lists sorted and consistent
        for v in 0..g.node_count() {
            let nbrs = g.neighbors(v);
            prop_assert!(nbrs.windows(2).all(|w| w[0] < w[1]));
            for &u in nbrs {
                prop_assert!(g.has_edge(u, v));
            }
        }
    }

    #[test]
    fn edge_list_round_trip(
        pairs in proptest::collection::vec((0i64..30, 0i64..30), 0..80),
        extra in 0usize..5,
    ) {
        let g = Graph::from_edge_list(&pairs, None).unwrap();
        let padded = Graph::from_edge_list(&pairs, Some(g.node_count() + extra)).unwrap();
        let back = Graph::parse_edge_list(&padded.to_edge_list_string()).unwrap();
        prop_assert_eq!(padded, back);
    }

    #[test]
    fn rewire_preserves_degrees(
        n in 10usize..60,
        p in 0.05f64..0.4,
        swaps in 0.0f64..8.0,
        seed in 0u64..1000,
    ) {
        let g = gen_er(n, p, seed).unwrap();
        let r = rewire_preserving_degree(&g, swaps, seed ^ 0xffff);
        let mut a = g.degrees();
        let mut b = r.degrees();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
        prop_assert_eq!(g.edge_count(), r.edge_count());
    }

    #[test]
    fn mmd_symmetry_and_self_zero(
        masses in proptest::collection::vec(
            proptest::collection::vec(0.01f64..1.0, 4),
            1..6,
        ),
        split_at in 1usize..5,
    ) {
        let descriptors: Vec<DescriptorValue> = masses
            .iter()
            .map(|raw| {
                let total: f64 = raw.iter().sum();
                DescriptorValue::Histogram(Histogram {
                    edges: (0..=4).map(|i| i as f64).collect(),
                    mass: raw.iter().map(|x| x / total).collect(),
                    kind: ggm_eval::descriptors::HistogramKind::Degree,
                })
            })
            .collect();
        let spec = KernelSpec::gaussian_tv(0.9);
        let self_mmd = mmd_squared(&descriptors, &descriptors, &spec).unwrap();
        prop_assert!(self_mmd.abs() <= 1e-12, "self mmd {}", self_mmd);

        let k = split_at.min(descriptors.len());
        let (x, y) = descriptors.split_at(k.max(1).min(descriptors.len() - 1).max(1));
        if !x.is_empty() && !y.is_empty() {
            let a = mmd_squared(x, y, &spec).unwrap();
            let b = mmd_squared(y, x, &spec).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn rbf_mmd_non_negative(
        xs in proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, 3), 1..5),
        ys in proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, 3), 1..5),
    ) {
        let wrap = |v: Vec<Vec<f64>>| -> Vec<DescriptorValue> {
            v.into_iter().map(DescriptorValue::Vector).collect()
        };
        let spec = KernelSpec { kind: KernelKind::GaussianRbf, sigma: 1.0 };
        let v = mmd_squared(&wrap(xs), &wrap(ys), &spec).unwrap();
        prop_assert!(v >= -1e-12, "negative mmd {}", v);
    }
}

#[test]
fn component_sizes_sum_to_n_over_1000_random_graphs() {
    use rand::Rng;
    let mut rng = ggm_eval::seed::stage_rng(31, "component-prop", 0);
    for _ in 0..1000 {
        let n = rng.random_range(1..80usize);
        let p = rng.random::<f64>() * 0.2;
        let seed = rng.random::<u64>();
        let g = gen_er(n, p, seed).unwrap();
        let parts = connected_components(&g);
        assert_eq!(parts.sizes.iter().sum::<usize>(), n);
        assert_eq!(parts.labels.len(), n);
    }
}
