//! Brute-force oracles shared by the integration suites and the
//! acceptance run.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use worldline_piston::bridges::Point3;
use worldline_piston::hulls::{hull_of_points, ConvexHull};
use worldline_piston::piston_region::*;
use worldline_piston::quadrature::{adaptive, Tolerance};

pub fn random_hull(rng: &mut ChaCha8Rng, points: usize, size: f64) -> ConvexHull {
    let pts: Vec<[f64; 3]> = (0..points)
        .map(|_| {
            [
                size * (rng.random::<f64>() - 0.5),
                size * (rng.random::<f64>() - 0.5),
                size * (rng.random::<f64>() - 0.5),
            ]
        })
        .collect();
    hull_of_points(&pts, points as u64, 0).unwrap()
}

/// z-window length at lambda from the indicator alone: grid scan then
/// bisection of every sign change.
pub fn window_by_indicator(h: &ConvexHull, rho: f64, lambda: f64, g: &PistonGeometry) -> f64 {
    // (a) needs z > lambda a - z_max and (c) needs z < -z_min
    let span = h.z_extent();
    let lo = lambda * g.a - h.z_max() - 1e-3 * span;
    let hi = -h.z_min() + 1e-3 * span;
    if hi <= lo {
        return 0.0;
    }
    let steps = 1500;
    let dz = (hi - lo) / steps as f64;
    let inside = |z: f64| indicator(h, rho, z, lambda, g);
    let edge = |mut a: f64, mut b: f64| {
        // inside(a) != inside(b)
        let ia = inside(a);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if inside(m) == ia {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let mut total = 0.0;
    let mut prev = lo;
    let mut prev_in = inside(lo);
    let mut start = None;
    for k in 1..=steps {
        let z = lo + dz * k as f64;
        let now = inside(z);
        if now != prev_in {
            let e = edge(prev, z);
            if now {
                start = Some(e);
            } else if let Some(s) = start.take() {
                total += e - s;
            }
        }
        prev = z;
        prev_in = now;
    }
    total
}

pub fn brute_area(h: &ConvexHull, rho: f64, g: &PistonGeometry) -> f64 {
    let lb = h
        .vertices()
        .iter()
        .map(|v| ((v[0] + rho).powi(2) + v[1] * v[1]).sqrt())
        .fold(0.0, f64::max)
        / g.r;
    let top = h.z_extent() / g.a;
    if top <= lb {
        return 0.0;
    }
    let tol = Tolerance {
        abs: 1e-10,
        rel: 1e-6,
        max_intervals: 400,
    };
    let window = |l: f64| window_by_indicator(h, rho, l, g);
    // locate the lambda ranges with an open window, then integrate each
    let steps = 400;
    let dl = (top - lb) / steps as f64;
    let edge = |mut open: f64, mut shut: f64| {
        for _ in 0..60 {
            let m = 0.5 * (open + shut);
            if window(m) > 0.0 {
                open = m;
            } else {
                shut = m;
            }
        }
        0.5 * (open + shut)
    };
    let mut total = 0.0;
    let mut start = if window(lb) > 0.0 { Some(lb) } else { None };
    let mut prev = lb;
    for k in 1..=steps {
        let l = lb + dl * k as f64;
        let open = window(l) > 0.0;
        match (start, open) {
            (None, true) => start = Some(edge(l, prev)),
            (Some(s0), false) => {
                let e = edge(prev, l);
                total += adaptive(window, s0, e, tol).map(|i| i.value).unwrap();
                start = None;
            }
            _ => {}
        }
        prev = l;
    }
    if let Some(s0) = start {
        total += adaptive(window, s0, top, tol).map(|i| i.value).unwrap();
    }
    total
}

pub fn random_geometry(rng: &mut ChaCha8Rng, flat_every: usize, k: usize) -> PistonGeometry {
    let a = 0.03 + 0.17 * rng.random::<f64>();
    if flat_every > 0 && k % flat_every == 0 {
        PistonGeometry::flat(a, 1.0).unwrap()
    } else {
        let cap = 1.0 + 0.5 * rng.random::<f64>().powi(2);
        PistonGeometry::spherical(a, 1.0, cap).unwrap()
    }
}

pub fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Extreme points by exhaustion: a point is a vertex iff it lies on a
/// triangle whose plane has every other point on one side.
pub fn extreme_points(pts: &[Point3]) -> BTreeSet<usize> {
    let n = pts.len();
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let nrm = cross(sub(pts[j], pts[i]), sub(pts[k], pts[i]));
                let len = dot(nrm, nrm).sqrt();
                if len < 1e-12 {
                    continue;
                }
                let (mut above, mut below) = (false, false);
                for (m, &p) in pts.iter().enumerate() {
                    if m == i || m == j || m == k {
                        continue;
                    }
                    let d = dot(nrm, sub(p, pts[i])) / len;
                    if d > 1e-12 {
                        above = true;
                    } else if d < -1e-12 {
                        below = true;
                    }
                }
                if !(above && below) {
                    out.extend([i, j, k]);
                }
            }
        }
    }
    out
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point3> {
    (0..n)
        .map(|_| {
            let g: [f64; 3] = [rng.random(), rng.random(), rng.random()];
            // mix of box-like and ball-like clouds
            [g[0] - 0.5, (g[1] - 0.5) * 2.0, (g[2] - 0.5).powi(3) * 8.0]
        })
        .collect()
}

pub fn index_of(pts: &[Point3]) -> HashMap<[u64; 3], usize> {
    pts.iter()
        .enumerate()
        .map(|(i, p)| ([p[0].to_bits(), p[1].to_bits(), p[2].to_bits()], i))
        .collect()
}

/// Convex test domains for the loop-inside iff hull-inside equivalence.
#[derive(Debug, Clone)]
pub enum Domain {
    Ball { c: Point3, r: f64 },
    Cylinder { c: [f64; 2], r: f64, z0: f64, z1: f64 },
    Slab { n: Point3, lo: f64, hi: f64 },
}

impl Domain {
    pub fn contains(&self, p: &Point3) -> bool {
        match *self {
            Domain::Ball { c, r } => {
                let d = sub(*p, c);
                dot(d, d) < r * r
            }
            Domain::Cylinder { c, r, z0, z1 } => {
                let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
                dx * dx + dy * dy < r * r && p[2] > z0 && p[2] < z1
            }
            Domain::Slab { n, lo, hi } => {
                let s = dot(n, *p);
                s > lo && s < hi
            }
        }
    }
}

pub fn domain_strategy() -> impl Strategy<Value = Domain> {
    prop_oneof![
        (prop::array::uniform3(-0.8f64..0.8), 0.3f64..2.0).prop_map(|(c, r)| Domain::Ball { c, r }),
        (prop::array::uniform2(-0.6f64..0.6), 0.3f64..1.5, -1.5f64..0.0, 0.0f64..1.5)
            .prop_map(|(c, r, z0, z1)| Domain::Cylinder { c, r, z0, z1 }),
        (prop::array::uniform3(-1.0f64..1.0), -1.2f64..0.0, 0.0f64..1.2).prop_map(|(n, lo, hi)| {
            let len = dot(n, n).sqrt().max(1e-3);
            Domain::Slab { n: [n[0] / len, n[1] / len, n[2] / len], lo, hi }
        }),
    ]
}
