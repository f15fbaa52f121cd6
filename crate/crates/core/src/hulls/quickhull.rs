//! Quickhull in three dimensions with per-face outside sets.
//!
//! Orientation tests use a tolerance of `EPS_REL` times the coordinate scale
//! of the input; points within that distance of a face plane count as on it.

use crate::bridges::Point3;

pub(crate) const EPS_REL: f64 = 1e-12;

/// Result of a hull construction, indices referring to the input slice.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Construction {
    /// Full-dimensional hull: vertex indices and outward-oriented triangles.
    Solid {
        vertices: Vec<usize>,
        faces: Vec<[usize; 3]>,
    },
    /// Lower-dimensional point set with its extreme points.
    Flat { dimension: u8, vertices: Vec<usize> },
}

#[inline]
fn sub(a: &Point3, b: &Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn dot(a: &Point3, b: &Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross(a: &Point3, b: &Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn norm(a: &Point3) -> f64 {
    dot(a, a).sqrt()
}

struct Face {
    v: [usize; 3],
    normal: Point3,
    offset: f64,
    /// neighbors[i] shares the edge (v[i], v[(i + 1) % 3]).
    neighbors: [usize; 3],
    outside: Vec<usize>,
    alive: bool,
    stamp: u32,
}

impl Face {
    fn new(points: &[Point3], v: [usize; 3], fallback: Option<Point3>) -> Face {
        let (a, b, c) = (&points[v[0]], &points[v[1]], &points[v[2]]);
        let n = cross(&sub(b, a), &sub(c, a));
        let len = norm(&n);
        let normal = if len > 0.0 && len.is_finite() {
            [n[0] / len, n[1] / len, n[2] / len]
        } else {
            fallback.unwrap_or([0.0, 0.0, 1.0])
        };
        let offset = dot(&normal, a);
        Face {
            v,
            normal,
            offset,
            neighbors: [usize::MAX; 3],
            outside: Vec::new(),
            alive: true,
            stamp: 0,
        }
    }

    #[inline]
    fn distance(&self, p: &Point3) -> f64 {
        dot(&self.normal, p) - self.offset
    }

    fn edge_index(&self, from: usize, to: usize) -> Option<usize> {
        (0..3).find(|&i| self.v[i] == from && self.v[(i + 1) % 3] == to)
    }
}

/// Coordinate scale used to turn the relative tolerance into a distance.
pub(crate) fn coordinate_scale(points: &[Point3]) -> f64 {
    let mut scale = 0.0f64;
    for p in points {
        for c in p {
            scale = scale.max(c.abs());
        }
    }
    scale
}

pub(crate) fn build(points: &[Point3]) -> Construction {
    assert!(!points.is_empty(), "hull of an empty point set");
    let scale = coordinate_scale(points);
    let eps = EPS_REL * scale.max(f64::MIN_POSITIVE);

    // Axis extremes.
    let mut extremes = [0usize; 6];
    for (i, p) in points.iter().enumerate() {
        for axis in 0..3 {
            if p[axis] < points[extremes[2 * axis]][axis] {
                extremes[2 * axis] = i;
            }
            if p[axis] > points[extremes[2 * axis + 1]][axis] {
                extremes[2 * axis + 1] = i;
            }
        }
    }
    let (mut i0, mut i1, mut best) = (extremes[0], extremes[0], -1.0);
    for &a in &extremes {
        for &b in &extremes {
            let d = norm(&sub(&points[a], &points[b]));
            if d > best {
                best = d;
                i0 = a;
                i1 = b;
            }
        }
    }
    if best <= eps {
        return Construction::Flat {
            dimension: 0,
            vertices: vec![extremes[0]],
        };
    }

    let dir = sub(&points[i1], &points[i0]);
    let (mut i2, mut best) = (i0, -1.0);
    for (i, p) in points.iter().enumerate() {
        let d = norm(&cross(&sub(p, &points[i0]), &dir)) / norm(&dir);
        if d > best {
            best = d;
            i2 = i;
        }
    }
    if best <= eps {
        return collinear_extremes(points, i0, &dir);
    }

    let plane = cross(&dir, &sub(&points[i2], &points[i0]));
    let plane_len = norm(&plane);
    let unit = [plane[0] / plane_len, plane[1] / plane_len, plane[2] / plane_len];
    let (mut i3, mut best) = (i0, -1.0);
    for (i, p) in points.iter().enumerate() {
        let d = dot(&sub(p, &points[i0]), &unit).abs();
        if d > best {
            best = d;
            i3 = i;
        }
    }
    if best <= eps {
        return coplanar_extremes(points, i0, &dir, &unit, eps);
    }

    quickhull(points, [i0, i1, i2, i3], eps)
}

fn collinear_extremes(points: &[Point3], origin: usize, dir: &Point3) -> Construction {
    let (mut lo, mut hi) = (origin, origin);
    let (mut tlo, mut thi) = (0.0, 0.0);
    for (i, p) in points.iter().enumerate() {
        let t = dot(&sub(p, &points[origin]), dir);
        if t < tlo {
            tlo = t;
            lo = i;
        }
        if t > thi {
            thi = t;
            hi = i;
        }
    }
    Construction::Flat {
        dimension: 1,
        vertices: vec![lo, hi],
    }
}

/// Monotone-chain hull in the plane spanned by `dir` and `unit x dir`.
fn coplanar_extremes(
    points: &[Point3],
    origin: usize,
    dir: &Point3,
    unit: &Point3,
    eps: f64,
) -> Construction {
    let dlen = norm(dir);
    let e1 = [dir[0] / dlen, dir[1] / dlen, dir[2] / dlen];
    let e2 = cross(unit, &e1);
    let mut pts: Vec<(f64, f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let d = sub(p, &points[origin]);
            (dot(&d, &e1), dot(&d, &e2), i)
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() <= eps && (a.1 - b.1).abs() <= eps);
    let turn = |o: &(f64, f64, usize), a: &(f64, f64, usize), b: &(f64, f64, usize)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let area_eps = eps * dlen.max(1.0);
    let mut chain: Vec<(f64, f64, usize)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = chain.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64, usize)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while chain.len() >= start + 2
                && turn(&chain[chain.len() - 2], &chain[chain.len() - 1], p) <= area_eps
            {
                chain.pop();
            }
            chain.push(*p);
        }
        chain.pop();
    }
    Construction::Flat {
        dimension: 2,
        vertices: chain.into_iter().map(|p| p.2).collect(),
    }
}

fn quickhull(points: &[Point3], simplex: [usize; 4], eps: f64) -> Construction {
    let [a, b, c, d] = simplex;
    let centroid = {
        let mut s = [0.0; 3];
        for &i in &simplex {
            for k in 0..3 {
                s[k] += 0.25 * points[i][k];
            }
        }
        s
    };
    let mut faces: Vec<Face> = Vec::new();
    for tri in [[a, b, c], [a, d, b], [b, d, c], [c, d, a]] {
        let mut f = Face::new(points, tri, None);
        if f.distance(&centroid) > 0.0 {
            f = Face::new(points, [tri[0], tri[2], tri[1]], None);
        }
        faces.push(f);
    }
    for fi in 0..4 {
        for e in 0..3 {
            let (from, to) = (faces[fi].v[e], faces[fi].v[(e + 1) % 3]);
            let nb = (0..4)
                .find(|&g| g != fi && faces[g].edge_index(to, from).is_some())
                .expect("tetrahedron faces share every edge");
            faces[fi].neighbors[e] = nb;
        }
    }

    for (i, p) in points.iter().enumerate() {
        if simplex.contains(&i) {
            continue;
        }
        for f in faces.iter_mut() {
            if f.distance(p) > eps {
                f.outside.push(i);
                break;
            }
        }
    }

    let mut pending: Vec<usize> = (0..4).filter(|&f| !faces[f].outside.is_empty()).collect();
    let mut stamp = 0u32;
    let mut visible: Vec<usize> = Vec::new();
    let mut horizon: Vec<(usize, usize, usize)> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut orphans: Vec<usize> = Vec::new();

    while let Some(fi) = pending.pop() {
        if !faces[fi].alive || faces[fi].outside.is_empty() {
            continue;
        }
        let apex = {
            let f = &faces[fi];
            let mut best = f.outside[0];
            let mut dmax = f.distance(&points[best]);
            for &i in &f.outside[1..] {
                let d = f.distance(&points[i]);
                if d > dmax {
                    dmax = d;
                    best = i;
                }
            }
            best
        };
        let apex_point = points[apex];

        stamp += 1;
        visible.clear();
        horizon.clear();
        stack.clear();
        stack.push(fi);
        faces[fi].stamp = stamp;
        while let Some(g) = stack.pop() {
            visible.push(g);
            for e in 0..3 {
                let nb = faces[g].neighbors[e];
                if faces[nb].stamp == stamp {
                    continue;
                }
                if faces[nb].distance(&apex_point) > eps {
                    faces[nb].stamp = stamp;
                    stack.push(nb);
                }
            }
        }
        for &g in &visible {
            for e in 0..3 {
                let nb = faces[g].neighbors[e];
                if faces[nb].stamp != stamp {
                    horizon.push((faces[g].v[e], faces[g].v[(e + 1) % 3], nb));
                }
            }
        }

        let first_new = faces.len();
        let fallback = faces[fi].normal;
        for &(u, w, nb) in &horizon {
            let mut f = Face::new(points, [u, w, apex], Some(fallback));
            f.neighbors[0] = nb;
            let new_id = faces.len();
            let back = faces[nb]
                .edge_index(w, u)
                .expect("horizon neighbor shares the edge");
            faces[nb].neighbors[back] = new_id;
            faces.push(f);
        }
        for k in first_new..faces.len() {
            let [u, w, _] = faces[k].v;
            // across (w, apex) is the new face starting at w; across (apex, u) the one ending at u
            let next = (first_new..faces.len())
                .find(|&j| faces[j].v[0] == w)
                .expect("horizon is a closed loop");
            let prev = (first_new..faces.len())
                .find(|&j| faces[j].v[1] == u)
                .expect("horizon is a closed loop");
            faces[k].neighbors[1] = next;
            faces[k].neighbors[2] = prev;
        }

        orphans.clear();
        for &g in &visible {
            faces[g].alive = false;
            let mut list = std::mem::take(&mut faces[g].outside);
            orphans.append(&mut list);
        }
        for &i in &orphans {
            if i == apex {
                continue;
            }
            let p = &points[i];
            for k in first_new..faces.len() {
                if faces[k].distance(p) > eps {
                    faces[k].outside.push(i);
                    break;
                }
            }
        }
        for k in first_new..faces.len() {
            if !faces[k].outside.is_empty() {
                pending.push(k);
            }
        }
    }

    let tris: Vec<[usize; 3]> = faces.iter().filter(|f| f.alive).map(|f| f.v).collect();
    let mut vertices: Vec<usize> = tris.iter().flatten().copied().collect();
    vertices.sort_unstable();
    vertices.dedup();
    Construction::Solid {
        vertices,
        faces: tris,
    }
}
