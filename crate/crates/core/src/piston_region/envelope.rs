//! Upper envelope of the per-vertex cap curves in the (lambda, z) plane.
//!
//! For a hull shifted by (rho, 0, z) and a casing scaled by lambda, vertex i
//! pierces the cap for z below
//!
//!   u_i(lambda) = lambda c0 - sqrt((lambda R)^2 - rho_i^2) - z_i,
//!
//! rho_i^2 = (x_i + rho)^2 + y_i^2, and the hull pierces the cap iff z < U,
//! the pointwise maximum of the u_i. Two such curves cross at most once: the
//! difference u_i - u_j = (rho_i^2 - rho_j^2)/(s_i + s_j) - (z_i - z_j) with
//! s = sqrt((lambda R)^2 - rho^2) is monotone in lambda. After a crossing the
//! vertex with the lower z wins, so sorting the undominated vertices by z
//! gives an argmax index that only decreases as lambda grows.

use super::geometry::PistonGeometry;
use crate::hulls::ConvexHull;

/// Curve bounding the cap condition on one envelope piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvelopeCurve {
    /// z = -z_i (flat head, or a vertex outside the scaled cap sphere).
    Constant { vertex: usize, z: f64 },
    /// z = lambda c0 - sqrt((lambda R)^2 - rho_sq) - z_i.
    Sphere { vertex: usize, rho_sq: f64, z: f64 },
}

impl EnvelopeCurve {
    pub fn vertex(&self) -> usize {
        match *self {
            EnvelopeCurve::Constant { vertex, .. } | EnvelopeCurve::Sphere { vertex, .. } => vertex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopePiece {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub curve: EnvelopeCurve,
}

/// Boundary of the integration region at fixed rho: for lambda in
/// [lambda_start, lambda_end] the admissible z form the window
/// [lambda a - z_max, U(lambda)].
#[derive(Debug, Clone, PartialEq)]
pub struct RegionEnvelope {
    pub rho: f64,
    pub geometry: PistonGeometry,
    pub z_max: f64,
    pub lambda_start: f64,
    pub lambda_end: f64,
    /// Empty when no lambda admits a window.
    pub pieces: Vec<EnvelopePiece>,
}

impl RegionEnvelope {
    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Envelope value U(lambda) from the piece covering lambda.
    pub fn upper(&self, lambda: f64) -> Option<f64> {
        let piece = self
            .pieces
            .iter()
            .find(|p| lambda >= p.lambda_lo && lambda <= p.lambda_hi)?;
        Some(curve_value(&piece.curve, lambda, &self.geometry))
    }

    /// Width of the z-window at lambda, zero outside the envelope.
    pub fn window(&self, lambda: f64) -> f64 {
        self.upper(lambda)
            .map_or(0.0, |u| (u - lambda * self.geometry.a + self.z_max).max(0.0))
    }

    /// Closed-form integral of the window over lambda.
    pub fn area(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| piece_area(p, self.z_max, &self.geometry))
            .sum()
    }
}

/// lambda c0 - sqrt((lambda R)^2 - rho_sq), computed as
/// (rho_sq - lambda^2 r^2)/(lambda c0 + s) to avoid cancellation at large R.
/// Clamped to <= 0; zero once rho_sq >= (lambda R)^2.
#[inline]
pub(crate) fn cap_drop(rho_sq: f64, lambda: f64, r: f64, cap: f64, c0: f64) -> f64 {
    let lr = lambda * cap;
    let s_sq = (lr - rho_sq.sqrt()) * (lr + rho_sq.sqrt());
    if s_sq <= 0.0 {
        return 0.0;
    }
    let s = s_sq.sqrt();
    let denom = lambda * c0 + s;
    if denom <= 0.0 {
        return 0.0;
    }
    let lrr = lambda * r;
    ((rho_sq.sqrt() - lrr) * (rho_sq.sqrt() + lrr) / denom).min(0.0)
}

/// u_i(lambda) for one vertex: -z_i if rho_i >= lambda R, otherwise
/// min(-z_i, lambda c0 - sqrt((lambda R)^2 - rho_i^2) - z_i). A flat head
/// gives -z_i throughout.
pub fn vertex_curve(rho_sq: f64, z: f64, lambda: f64, geometry: &PistonGeometry) -> f64 {
    match geometry.cap_radius() {
        None => -z,
        Some(cap) => {
            cap_drop(rho_sq, lambda, geometry.r, cap, geometry.c0().unwrap_or(0.0)) - z
        }
    }
}

pub(crate) fn curve_value(curve: &EnvelopeCurve, lambda: f64, geometry: &PistonGeometry) -> f64 {
    match *curve {
        EnvelopeCurve::Constant { z, .. } => -z,
        EnvelopeCurve::Sphere { rho_sq, z, .. } => vertex_curve(rho_sq, z, lambda, geometry),
    }
}

/// Pointwise U(lambda) = max_i u_i(lambda) by direct evaluation over all vertices.
pub fn envelope_value(hull: &ConvexHull, rho: f64, lambda: f64, geometry: &PistonGeometry) -> f64 {
    hull.vertices()
        .iter()
        .map(|v| vertex_curve(rho_sq(v, rho), v[2], lambda, geometry))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[inline]
pub(crate) fn rho_sq(v: &[f64; 3], rho: f64) -> f64 {
    let x = v[0] + rho;
    x * x + v[1] * v[1]
}

/// Integral of the window over one piece.
fn piece_area(piece: &EnvelopePiece, z_max: f64, geometry: &PistonGeometry) -> f64 {
    let (l1, l2) = (piece.lambda_lo, piece.lambda_hi);
    if l2 <= l1 {
        return 0.0;
    }
    let a = geometry.a;
    let (z, drop_integral) = match piece.curve {
        EnvelopeCurve::Constant { z, .. } => (z, 0.0),
        EnvelopeCurve::Sphere { rho_sq, z, .. } => {
            let cap = geometry.cap_radius().expect("sphere piece on a capped geometry");
            let c0 = geometry.c0().unwrap_or(0.0);
            (z, cap_drop_integral(rho_sq, l1, l2, geometry.r, cap, c0))
        }
    };
    let m = z_max - z;
    drop_integral + (l2 - l1) * (m - 0.5 * a * (l1 + l2))
}

/// int_{l1}^{l2} (lambda c0 - sqrt(lambda^2 R^2 - p^2)) dlambda
/// = [ (lambda/2) g(lambda) + (p^2 / 2R) ln(lambda R + s(lambda)) ]_{l1}^{l2}
/// with g the clamped cap drop.
pub(crate) fn cap_drop_integral(rho_sq: f64, l1: f64, l2: f64, r: f64, cap: f64, c0: f64) -> f64 {
    let s = |l: f64| {
        let lr = l * cap;
        ((lr - rho_sq.sqrt()) * (lr + rho_sq.sqrt())).max(0.0).sqrt()
    };
    let g1 = cap_drop(rho_sq, l1, r, cap, c0);
    let g2 = cap_drop(rho_sq, l2, r, cap, c0);
    let log_term = if rho_sq > 0.0 {
        rho_sq / (2.0 * cap) * ((l2 * cap + s(l2)) / (l1 * cap + s(l1))).ln()
    } else {
        0.0
    };
    0.5 * (l2 * g2 - l1 * g1) + log_term
}

/// Undominated vertex: no other vertex has both lower z and larger rho_i.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Candidate {
    pub vertex: usize,
    pub rho_sq: f64,
    pub z: f64,
}

/// Reusable per-hull state for repeated envelope evaluations at different rho.
pub(crate) struct EnvelopeSolver<'h> {
    hull: &'h ConvexHull,
    geometry: PistonGeometry,
    /// Vertex indices sorted by ascending z.
    order: Vec<usize>,
    candidates: Vec<Candidate>,
}

/// Outcome of one sweep; pieces are written into the caller's buffer.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SweepSpan {
    pub lambda_start: f64,
    pub lambda_end: f64,
}

impl<'h> EnvelopeSolver<'h> {
    pub fn new(hull: &'h ConvexHull, geometry: PistonGeometry) -> Self {
        let mut order: Vec<usize> = (0..hull.vertex_count()).collect();
        let v = hull.vertices();
        order.sort_by(|&i, &j| v[i][2].total_cmp(&v[j][2]).then(i.cmp(&j)));
        EnvelopeSolver {
            hull,
            geometry,
            order,
            candidates: Vec::with_capacity(32),
        }
    }

    pub fn geometry(&self) -> &PistonGeometry {
        &self.geometry
    }

    /// Smallest lambda for which the shifted hull fits inside the cylinder.
    pub fn lambda_lower_bound(&self, rho: f64) -> f64 {
        let max_sq = self
            .hull
            .vertices()
            .iter()
            .map(|v| rho_sq(v, rho))
            .fold(0.0, f64::max);
        max_sq.sqrt() / self.geometry.r
    }

    /// Window width at lambda_start; the region at this rho is non-empty iff positive.
    pub fn start_window(&self, rho: f64) -> f64 {
        let lambda = self.lambda_lower_bound(rho);
        let hull = self.hull;
        let u = match self.geometry.head {
            super::Head::Flat => -hull.z_min(),
            super::Head::Spherical(_) => envelope_value(hull, rho, lambda, &self.geometry),
        };
        u + hull.z_max() - lambda * self.geometry.a
    }

    fn collect_candidates(&mut self, rho: f64) {
        self.candidates.clear();
        let v = self.hull.vertices();
        let mut best = f64::NEG_INFINITY;
        for &i in &self.order {
            let q = rho_sq(&v[i], rho);
            if q > best {
                best = q;
                self.candidates.push(Candidate {
                    vertex: i,
                    rho_sq: q,
                    z: v[i][2],
                });
            }
        }
    }

    /// Window width W(lambda) = u_c(lambda) + z_max - a lambda for candidate c.
    fn window_of(&self, c: &Candidate, lambda: f64) -> f64 {
        vertex_curve(c.rho_sq, c.z, lambda, &self.geometry) + self.hull.z_max()
            - self.geometry.a * lambda
    }

    /// Sweep the envelope at `rho`, truncated where the window closes.
    pub fn sweep(&mut self, rho: f64, pieces: &mut Vec<EnvelopePiece>) -> SweepSpan {
        pieces.clear();
        let hull = self.hull;
        let g = self.geometry;
        let lambda_start = self.lambda_lower_bound(rho);
        let z_max = hull.z_max();
        let lambda_cap = hull.z_extent() / g.a;

        let cap = match g.head {
            super::Head::Flat => {
                // U = -z_min: one constant piece ending at dz/a.
                let vertex = self.order.first().copied().unwrap_or(0);
                if lambda_start < lambda_cap {
                    pieces.push(EnvelopePiece {
                        lambda_lo: lambda_start,
                        lambda_hi: lambda_cap,
                        curve: EnvelopeCurve::Constant {
                            vertex,
                            z: hull.z_min(),
                        },
                    });
                    return SweepSpan {
                        lambda_start,
                        lambda_end: lambda_cap,
                    };
                }
                return SweepSpan {
                    lambda_start,
                    lambda_end: lambda_start,
                };
            }
            super::Head::Spherical(cap) => cap,
        };
        let c0 = g.c0().unwrap_or(0.0);
        self.collect_candidates(rho);
        let cands = &self.candidates;

        // argmax at the start, ties to the lowest z
        let mut cur = 0;
        let mut best = f64::NEG_INFINITY;
        for (k, c) in cands.iter().enumerate() {
            let u = vertex_curve(c.rho_sq, c.z, lambda_start, &g);
            if u > best {
                best = u;
                cur = k;
            }
        }
        if best + z_max - g.a * lambda_start <= 0.0 {
            return SweepSpan {
                lambda_start,
                lambda_end: lambda_start,
            };
        }

        let mut lambda = lambda_start;
        for _ in 0..=cands.len() + 1 {
            let (mut next, mut next_k) = (f64::INFINITY, cur);
            for k in 0..cur {
                let x = crossing(&cands[k], &cands[cur], cap, lambda);
                if x < next {
                    next = x;
                    next_k = k;
                }
            }
            if next <= lambda {
                cur = next_k;
                continue;
            }
            let c = cands[cur];
            let stop = next.min(lambda_cap);
            if self.window_of(&c, stop) <= 0.0 || next >= lambda_cap {
                let root = self.window_root(&c, lambda, stop, cap, c0);
                pieces.push(EnvelopePiece {
                    lambda_lo: lambda,
                    lambda_hi: root,
                    curve: sphere(&c),
                });
                return SweepSpan {
                    lambda_start,
                    lambda_end: root,
                };
            }
            pieces.push(EnvelopePiece {
                lambda_lo: lambda,
                lambda_hi: next,
                curve: sphere(&c),
            });
            lambda = next;
            cur = next_k;
        }
        unreachable!("envelope sweep visits each candidate at most once")
    }

    /// Root of the decreasing window on [lo, hi] for curve c; `hi` if the
    /// window is still open there.
    fn window_root(&self, c: &Candidate, lo: f64, hi: f64, cap: f64, c0: f64) -> f64 {
        let w_hi = self.window_of(c, hi);
        if w_hi > 0.0 {
            return hi;
        }
        let a = self.geometry.a;
        let r = self.geometry.r;
        // s = lambda (c0 - a) + m squared: (r^2 + 2 a c0 - a^2) lambda^2 - 2 k m lambda - (m^2 + p^2) = 0
        let k = c0 - a;
        let m = self.hull.z_max() - c.z;
        let qa = r * r + 2.0 * a * c0 - a * a;
        let qb = -2.0 * k * m;
        let qc = -(m * m + c.rho_sq);
        let mut roots = [f64::NAN; 2];
        if qa != 0.0 {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                let t = -0.5 * (qb + qb.signum() * sq);
                roots = [t / qa, if t != 0.0 { qc / t } else { f64::NAN }];
            }
        } else if qb != 0.0 {
            roots[0] = -qc / qb;
        }
        let span = (hi - lo).abs().max(hi.abs() * 1e-15);
        let scale = m.abs() + a * hi + 1e-300;
        for x in roots {
            if x.is_finite()
                && x >= lo - 1e-12 * span
                && x <= hi + 1e-12 * span
                && x * k + m >= 0.0
            {
                let x = x.clamp(lo, hi);
                if self.window_of(c, x).abs() <= 1e-11 * scale {
                    return x;
                }
            }
        }
        // bisection fallback
        let (mut l, mut h) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (l + h);
            if mid <= l || mid >= h {
                break;
            }
            if self.window_of(c, mid) > 0.0 {
                l = mid;
            } else {
                h = mid;
            }
        }
        let _ = cap;
        0.5 * (l + h)
    }

    /// Window integral at rho, with the envelope pieces left in `pieces`.
    pub fn area(&mut self, rho: f64, pieces: &mut Vec<EnvelopePiece>) -> f64 {
        let span = self.sweep(rho, pieces);
        let g = self.geometry;
        let z_max = self.hull.z_max();
        if let super::Head::Flat = g.head {
            // (a/2)(dz/a - lambda_start)^2 without the subtraction of large terms
            let d = span.lambda_end - span.lambda_start;
            return if d > 0.0 { 0.5 * g.a * d * d } else { 0.0 };
        }
        pieces.iter().map(|p| piece_area(p, z_max, &g)).sum()
    }

    pub fn envelope(&mut self, rho: f64) -> RegionEnvelope {
        let mut pieces = Vec::new();
        let span = self.sweep(rho, &mut pieces);
        RegionEnvelope {
            rho,
            geometry: self.geometry,
            z_max: self.hull.z_max(),
            lambda_start: span.lambda_start,
            lambda_end: span.lambda_end,
            pieces,
        }
    }
}

fn sphere(c: &Candidate) -> EnvelopeCurve {
    EnvelopeCurve::Sphere {
        vertex: c.vertex,
        rho_sq: c.rho_sq,
        z: c.z,
    }
}

/// lambda at which `low` (lower z, smaller rho) overtakes `high`.
///
/// At the crossing s_high = t = (a - b - d^2)/(2d) with a = rho_high^2,
/// b = rho_low^2 and d = z_high - z_low, hence (lambda R)^2 = a + t^2.
/// Returns -inf if `low` already dominates on the whole domain and +inf if it
/// never does. The closed form is checked against the sign of the curve
/// difference and refined by bisection if rounding left it on the wrong side.
fn crossing(low: &Candidate, high: &Candidate, cap: f64, lambda_now: f64) -> f64 {
    let d = high.z - low.z;
    if d <= 0.0 {
        return f64::INFINITY;
    }
    let a = high.rho_sq;
    let b = low.rho_sq;
    let t = (a - b - d * d) / (2.0 * d);
    if t < 0.0 {
        return f64::NEG_INFINITY;
    }
    let x = (a + t * t).sqrt() / cap;
    if x <= lambda_now {
        return x;
    }
    // curve difference u_high - u_low = (a - b)/(s_high + s_low) - d, decreasing
    let diff = |l: f64| {
        let lr = l * cap;
        let sh = ((lr - a.sqrt()) * (lr + a.sqrt())).max(0.0).sqrt();
        let sl = ((lr - b.sqrt()) * (lr + b.sqrt())).max(0.0).sqrt();
        let denom = sh + sl;
        if denom > 0.0 {
            (a - b) / denom - d
        } else {
            f64::INFINITY
        }
    };
    let tol = 1e-12 * x;
    if diff(x - tol) >= 0.0 && diff(x + tol) <= 0.0 {
        return x;
    }
    let (mut lo, mut hi) = (lambda_now.max(a.sqrt() / cap), x * 2.0 + 1.0);
    while diff(hi) > 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    if diff(lo) <= 0.0 {
        return lo;
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if diff(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
