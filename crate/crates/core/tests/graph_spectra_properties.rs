use std::f64::consts::PI;

use emlab_core::constructions::random_regular_graph;
use emlab_core::graph::{build_g_of_h, named, overlay, subdivide, EdgeSelection, Graph};
use emlab_core::spectra::{
    eigenvalues, interval_count, multiplicity, spectra_match, Spectrum, SpectrumTransform,
};
use proptest::prelude::*;

/// Random multigraph with loops on up to 12 vertices.
fn multigraph() -> impl Strategy<Value = Graph> {
    (2usize..12).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, 1u64..4), 0..3 * n).prop_map(move |edges| {
            let mut g = Graph::new(n);
            for (u, v, w) in edges {
                g.add_edge(u, v, w);
            }
            g
        })
    })
}

fn simple_graph() -> impl Strategy<Value = Graph> {
    (3usize..14).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut g = Graph::new(n);
            let mut k = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if bits[k] {
                        g.add_edge(u, v, 1);
                    }
                    k += 1;
                }
            }
            g
        })
    })
}

fn same_weights(a: &Graph, b: &Graph) -> bool {
    a.n() == b.n() && a.edges().eq(b.edges())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adjacency_is_symmetric_and_degrees_add_up(g in multigraph()) {
        for u in 0..g.n() {
            let mut sum = 0;
            for v in 0..g.n() {
                prop_assert_eq!(g.weight(u, v), g.weight(v, u));
                sum += g.weight(u, v);
            }
            prop_assert_eq!(sum, g.degree(u));
        }
    }

    #[test]
    fn overlay_is_commutative_and_associative(a in multigraph(), b in multigraph(), c in multigraph()) {
        let n = a.n().min(b.n()).min(c.n());
        let cut = |g: &Graph| {
            let mut h = Graph::new(n);
            for (u, v, w) in g.edges().filter(|&(u, v, _)| u < n && v < n) {
                h.add_edge(u, v, w);
            }
            h
        };
        let (a, b, c) = (cut(&a), cut(&b), cut(&c));
        prop_assert!(same_weights(&overlay(&a, &b).unwrap(), &overlay(&b, &a).unwrap()));
        let left = overlay(&overlay(&a, &b).unwrap(), &c).unwrap();
        let right = overlay(&a, &overlay(&b, &c).unwrap()).unwrap();
        prop_assert!(same_weights(&left, &right));
    }

    #[test]
    fn subdivision_counts(g in simple_graph(), keep in prop::collection::vec(any::<bool>(), 0..100), m in 1usize..6) {
        let mut sel = EdgeSelection::new();
        for ((u, v, w), k) in g.edges().zip(keep.iter().chain(std::iter::repeat(&true))) {
            if *k {
                sel.add(u, v, w);
            }
        }
        let units = sel.units() as usize;
        let s = subdivide(&g, &sel, m).unwrap();
        prop_assert_eq!(s.n(), g.n() + (m - 1) * units);
        for v in 0..g.n() {
            prop_assert_eq!(s.degree(v), g.degree(v));
        }
        for v in g.n()..s.n() {
            prop_assert_eq!(s.degree(v), 2);
        }
        prop_assert_eq!(s.edge_units() as usize, g.edge_units() as usize + (m - 1) * units);
    }

    #[test]
    fn text_round_trip(g in multigraph()) {
        prop_assert_eq!(Graph::from_text(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn trace_and_frobenius_identities(g in multigraph()) {
        let s = eigenvalues(&g).unwrap();
        prop_assert_eq!(s.len(), g.n());
        prop_assert!(s.values().windows(2).all(|w| w[0] >= w[1]));
        let trace: u64 = (0..g.n()).map(|v| g.weight(v, v)).sum();
        let frob: u64 = (0..g.n()).flat_map(|u| (0..g.n()).map(move |v| (u, v))).map(|(u, v)| g.weight(u, v).pow(2)).sum();
        let scale = 1e-8 * g.n() as f64 * g.max_degree().max(1) as f64;
        prop_assert!((s.values().iter().sum::<f64>() - trace as f64).abs() <= scale);
        let squares: f64 = s.values().iter().map(|x| x * x).sum();
        prop_assert!((squares - frob as f64).abs() <= scale * g.max_degree().max(1) as f64);
        prop_assert!(s.lambda1() <= g.max_degree() as f64 + 1e-9);
    }

    #[test]
    fn deleting_a_vertex_interlaces(g in simple_graph(), v in any::<usize>(), a in -4.0f64..4.0, len in 0.0f64..4.0) {
        let v = v % g.n();
        let s = eigenvalues(&g).unwrap();
        let t = eigenvalues(&g.delete_vertex(v)).unwrap();
        let (lo, hi) = (a, a + len);
        let before = interval_count(&s, lo, hi).unwrap() as i64;
        let after = interval_count(&t, lo, hi).unwrap() as i64;
        prop_assert!((before - after).abs() <= 1, "{before} vs {after} on [{lo}, {hi}]");
    }

    #[test]
    fn multiplicity_report_bounds(g in simple_graph(), k in any::<usize>(), tol in 1e-9f64..0.5) {
        let s = eigenvalues(&g).unwrap();
        let target = s.values()[k % s.len()];
        let r = multiplicity(&s, target, tol);
        prop_assert!(r.count >= 1);
        prop_assert!(r.cluster_width() <= 2.0 * tol);
        if let Some(sep) = r.separation {
            prop_assert!(sep > tol || r.ambiguous);
        }
    }

    #[test]
    fn spectra_match_under_affine_maps(g in simple_graph(), scale in prop::sample::select(vec![-3.0, -0.5, 0.25, 2.0]), shift in -2.0f64..2.0) {
        let s = eigenvalues(&g).unwrap();
        prop_assert!(spectra_match(&s, &s, &SpectrumTransform::scale(1.0), 1e-12));
        let t = SpectrumTransform::affine(scale, shift);
        let image = Spectrum::from_values(t.apply(&s));
        prop_assert!(spectra_match(&s, &image, &t, 1e-9));
        prop_assert!(spectra_match(&image, &s, &t.inverse(), 1e-9));
    }

    #[test]
    fn pairing_model_is_simple_and_cubic(half in 2usize..40, seed in any::<u64>()) {
        let g = random_regular_graph(2 * half, seed).unwrap();
        g.check_regular(3).unwrap();
        prop_assert!(!g.has_loops());
        prop_assert!(g.edges().all(|(_, _, w)| w == 1));
    }
}

#[test]
fn cycle_spectra_have_closed_forms() {
    for n in 3..=12 {
        let s = eigenvalues(&named::cycle(n)).unwrap();
        let mut expect: Vec<f64> = (0..n)
            .map(|k| 2.0 * (2.0 * PI * k as f64 / n as f64).cos())
            .collect();
        expect.sort_by(|a, b| b.total_cmp(a));
        for (x, y) in s.values().iter().zip(&expect) {
            assert!((x - y).abs() < 1e-9, "C_{n}: {x} vs {y}");
        }
    }
}

#[test]
fn blowup_degree_profile_and_round_trip() {
    for (h, ell) in [
        (named::petersen(), 11),
        (named::complete(4), 12),
        (random_regular_graph(20, 5).unwrap(), 11),
    ] {
        let n = h.n();
        let g = build_g_of_h(&h, ell).unwrap();
        let hubs = (0..g.n()).filter(|&v| g.degree(v) == 6).count();
        let interior = (0..g.n()).filter(|&v| g.degree(v) == 2).count();
        assert_eq!(hubs, 4 * n);
        assert_eq!(interior, 6 * n * (ell - 1));
        assert_eq!(g.n(), hubs + interior);
        assert!(g.is_connected());
        assert_eq!(Graph::from_text(&g.to_text()).unwrap(), g);
    }
}
