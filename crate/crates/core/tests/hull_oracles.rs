use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use worldline_piston::bridges::{sample_bridge, RngStream};
use worldline_piston::hulls::*;

mod common;
use common::*;

#[test]
fn vertices_match_exhaustive_extreme_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..60 {
        let n = 4 + case % 47;
        let pts = random_points(&mut rng, n);
        let hull = hull_of_points(&pts, n as u64, case as u64).unwrap();
        let idx = index_of(&pts);
        let got: BTreeSet<usize> = hull
            .vertices()
            .iter()
            .map(|v| idx[&[v[0].to_bits(), v[1].to_bits(), v[2].to_bits()]])
            .collect();
        assert_eq!(got.len(), hull.vertex_count(), "duplicate vertices");
        assert_eq!(got, extreme_points(&pts), "case {case}, {n} points");
    }
}

#[test]
fn triangulation_is_a_closed_outward_surface() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..40 {
        let pts = random_points(&mut rng, 10 + case * 5);
        let hull = hull_of_points(&pts, 0, 0).unwrap();
        let (v, f) = (hull.vertex_count(), hull.face_count());
        // simplicial polytope: every edge shared by two faces
        let mut edges: HashMap<(u32, u32), i32> = HashMap::new();
        for t in hull.faces() {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += if a < b { 1 } else { -1 };
            }
        }
        assert!(edges.values().all(|&c| c == 0), "edge used twice in one direction");
        assert_eq!(v as i64 - edges.len() as i64 + f as i64, 2, "Euler relation");
        assert_eq!(f, 2 * v - 4);
        for p in &pts {
            assert!(max_face_distance(&hull, p) <= 1e-12);
        }
        // every vertex lies on some face
        let used: BTreeSet<u32> = hull.faces().iter().flatten().copied().collect();
        assert_eq!(used.len(), v);
    }
}

#[test]
fn loop_hulls_contain_their_loops() {
    for i in 0..10 {
        let lp = sample_bridge(20_000, RngStream::new(9, i)).unwrap();
        let hull = convex_hull(&lp).unwrap();
        assert!(hull.vertex_count() >= 4 && hull.vertex_count() < 400);
        for p in lp.points() {
            assert!(max_face_distance(&hull, p) <= 1e-12);
        }
        // hull vertices are loop points
        let idx = index_of(lp.points());
        for v in hull.vertices() {
            assert!(idx.contains_key(&[v[0].to_bits(), v[1].to_bits(), v[2].to_bits()]));
        }
    }
}

#[test]
fn vertex_count_grows_with_points() {
    let stats = hull_statistics(&[100, 1000, 10_000], 40, 3).unwrap();
    assert!(stats.vertices_increase_with_n());
    let n1000 = &stats.rows[1];
    assert!(n1000.mean_vertices > 45.0 && n1000.mean_vertices < 65.0);
    assert!((n1000.mean_faces - (2.0 * n1000.mean_vertices - 4.0)).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn loop_inside_iff_hull_inside(seed in 0u64..10_000, domain in domain_strategy()) {
        let lp = sample_bridge(800, RngStream::new(seed, 0)).unwrap();
        let hull = convex_hull(&lp).unwrap();
        let loop_in = lp.points().iter().all(|p| domain.contains(p));
        let hull_in = hull.vertices().iter().all(|p| domain.contains(p));
        prop_assert_eq!(loop_in, hull_in);
    }

    #[test]
    fn small_point_sets_agree_with_oracle(seed in any::<u64>(), n in 4usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = random_points(&mut rng, n);
        let hull = hull_of_points(&pts, 0, 0).unwrap();
        prop_assert_eq!(hull.vertex_count(), extreme_points(&pts).len());
    }
}
