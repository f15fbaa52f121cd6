use worldline_piston::estimator::*;
use worldline_piston::hulls::{generate_hulls, ConvexHull};
use worldline_piston::piston_region::*;
use worldline_piston::reference;

fn hulls(seed: u64, n: usize, count: usize) -> Vec<ConvexHull> {
    generate_hulls(seed, n, count, false).unwrap().hulls
}

fn geometry(a: f64, cap: Option<f64>) -> PistonGeometry {
    match cap {
        Some(c) => PistonGeometry::spherical(a, 1.0, c).unwrap(),
        None => PistonGeometry::flat(a, 1.0).unwrap(),
    }
}

#[test]
fn estimates_are_non_positive() {
    let hs = hulls(1, 2000, 60);
    for cap in [Some(1.0), Some(1.005), Some(1.25), None] {
        for a in [0.02, 0.1, 0.5] {
            let est = estimate_energy(&hs, &geometry(a, cap), QuadraturePolicy::default()).unwrap();
            assert!(est.mean_energy <= 0.0 && est.std_error >= 0.0);
            assert_eq!(est.n_hulls, 60);
            assert_eq!(est.points_per_loop, 2000);
        }
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let hs = hulls(2, 3000, 80);
    let g = geometry(0.05, Some(1.02));
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_energy(&hs, &g, QuadraturePolicy::default()).unwrap())
    };
    let one = run(1);
    for t in [2, 3, 7] {
        let other = run(t);
        assert_eq!(one.mean_energy.to_bits(), other.mean_energy.to_bits());
        assert_eq!(one.std_error.to_bits(), other.std_error.to_bits());
    }
    // hull generation is partition-independent too
    let gen = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| generate_hulls(5, 1000, 30, false).unwrap().hulls)
    };
    assert_eq!(gen(1), gen(4));
}

#[test]
fn energy_scales_inversely_with_length() {
    let hs = hulls(3, 2000, 40);
    for cap in [Some(1.0), Some(1.1), None] {
        let base = estimate_energy(&hs, &geometry(0.05, cap), QuadraturePolicy::default()).unwrap();
        for s in [0.5, 2.0, 3.0] {
            let g = geometry(0.05, cap).scaled(s).unwrap();
            let est = estimate_energy(&hs, &g, QuadraturePolicy::default()).unwrap();
            let want = base.mean_energy / s;
            assert!(
                (est.mean_energy - want).abs() <= 1e-5 * want.abs(),
                "{g}: {} vs {want}",
                est.mean_energy
            );
            assert!((est.energy_times_r() - base.energy_times_r()).abs() <= 1e-5 * want.abs() * s);
        }
    }
}

#[test]
fn per_hull_weights_drop_with_height() {
    let hs = hulls(4, 5000, 40);
    for cap in [Some(1.0), Some(1.02), None] {
        let mut prev: Option<Vec<f64>> = None;
        for a in [0.02, 0.05, 0.1, 0.2] {
            let w = hull_weights(&hs, &geometry(a, cap), QuadraturePolicy::default()).unwrap();
            if let Some(p) = &prev {
                for (i, (x, y)) in p.iter().zip(&w).enumerate() {
                    assert!(y <= &(x * (1.0 + 1e-9)), "hull {i}, a = {a}: {y} > {x}");
                }
            }
            prev = Some(w);
        }
    }
}

#[test]
fn energy_ordered_by_cap_radius() {
    let hs = hulls(6, 5000, 60);
    let q = QuadraturePolicy::default();
    let e = |cap| estimate_energy(&hs, &geometry(0.1, cap), q).unwrap().mean_energy;
    let (hemi, slight, wide, flat) = (e(Some(1.0)), e(Some(1.02)), e(Some(1.25)), e(None));
    assert!(hemi > slight && slight > wide && wide > flat, "{hemi} {slight} {wide} {flat}");
    // per hull as well: a flatter cap only widens the region beyond it
    let w1 = hull_weights(&hs, &geometry(0.1, Some(1.0)), q).unwrap();
    let w2 = hull_weights(&hs, &geometry(0.1, Some(1.02)), q).unwrap();
    assert!(w1.iter().zip(&w2).all(|(a, b)| a <= &(b * (1.0 + 1e-9))));
}

#[test]
fn pfa_overestimates_the_slightly_curved_head() {
    let hs = hulls(7, 20_000, 200);
    let g = geometry(0.1, Some(1.02));
    let est = estimate_energy(&hs, &g, QuadraturePolicy::default()).unwrap();
    let ratio = reference::pfa_energy(&g).unwrap() / est.mean_energy;
    assert!(ratio > 3.0 && ratio < 40.0, "PFA / MC = {ratio}");
}

#[test]
fn flat_head_matches_plates_with_wall_term() {
    // E = -pi^3 r^2 / (1440 a^3) + zeta(3) 2 pi r / (64 pi a^2) for a Dirichlet wall
    let a = 0.1;
    let hs = hulls(10, 100_000, 1000);
    let est = estimate_energy(&hs, &geometry(a, None), QuadraturePolicy::default()).unwrap();
    let plates = reference::parallel_plates_energy(a, 1.0).unwrap();
    let wall = 1.202_056_903_159_594 * 2.0 * std::f64::consts::PI / (64.0 * std::f64::consts::PI * a * a);
    let want = plates + wall;
    assert!(
        (est.mean_energy - want).abs() < 4.0 * est.std_error + 0.015 * want.abs(),
        "{} +- {} vs {want}",
        est.mean_energy,
        est.std_error
    );
}

#[test]
fn sweep_rows_follow_the_grid() {
    let hs = hulls(8, 1000, 20);
    let rows = sweep(1.0, &[0.05, 0.1], &[Some(1.0), None], &hs, QuadraturePolicy::Fixed(32), 8).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0].cap_over_r, 1.0);
    assert!(rows[3].cap_over_r.is_infinite());
    assert!(rows.iter().all(|r| r.e_times_r <= 0.0 && r.n_hulls == 20 && r.seed == 8));
    assert!(rows[0].e_times_r.abs() > rows[1].e_times_r.abs());
    assert!(rows[2].e_times_r.abs() > rows[3].e_times_r.abs());
    let plates = reference::parallel_plates_energy(0.05, 1.0).unwrap();
    assert_eq!(rows[2].semiclassical, plates);
}

#[test]
fn shorter_loops_are_rejected_when_mixed() {
    let mut hs = hulls(9, 1000, 5);
    hs.extend(hulls(9, 500, 5));
    let err = estimate_energy(&hs, &geometry(0.1, None), QuadraturePolicy::default()).unwrap_err();
    assert!(matches!(err, EstimatorError::MixedPointCounts { .. }));
}
