//! Per-hull weight of the Casimir piston.
//!
//! A hull with vertices (x_i, y_i, z_i), shifted to radial offset rho and
//! height z and scaled by lambda relative to the casing, contributes if it
//! crosses the piston at height lambda a, stays inside the cylinder of
//! radius lambda r and pokes through the cap, all in the hull's own frame.
//! The weight is
//!
//!   I = int rho drho int dz int dlambda [region].
//!
//! For fixed rho the (z, lambda) region is bounded by the upper envelope of
//! per-vertex cap curves, so both inner integrals are done in closed form
//! and only the rho integral is numerical.

mod envelope;
pub mod geometry;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::hulls::ConvexHull;
use crate::quadrature::{self, GaussLegendre, QuadratureError, Tolerance};

pub use envelope::{envelope_value, vertex_curve, EnvelopeCurve, EnvelopePiece, RegionEnvelope};
pub use geometry::{GeometryError, Head, PistonGeometry};

use envelope::EnvelopeSolver;

/// Default node count of the fixed rule.
pub const DEFAULT_FIXED_NODES: usize = 64;
/// Grid used to locate the rho-support of A(rho).
const SUPPORT_SCAN_POINTS: usize = 128;
/// Relative guard on the rho range r dz / a.
const RHO_GUARD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("hull {stream_index}: rho quadrature failed: {source}")]
    Quadrature {
        stream_index: u64,
        source: QuadratureError,
    },
    #[error("hull {stream_index}: negative inner area {value:e} at rho = {rho} (envelope inconsistency)")]
    NegativeArea {
        stream_index: u64,
        rho: f64,
        value: f64,
    },
    #[error("fixed quadrature needs at least one node")]
    NoNodes,
}

/// How the rho integral is done.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadraturePolicy {
    /// Adaptive 15-point Gauss-Kronrod per hull. The absolute tolerance is
    /// `abs_factor` times r^2 dz^2 / 2a, the hull's weight scale.
    Adaptive { abs_factor: f64, rel: f64 },
    /// k-point Gauss-Legendre on each smooth panel of the support.
    Fixed(usize),
}

impl Default for QuadraturePolicy {
    fn default() -> Self {
        QuadraturePolicy::Adaptive {
            abs_factor: 1e-10,
            rel: 1e-6,
        }
    }
}

impl QuadraturePolicy {
    pub fn fixed_default() -> Self {
        QuadraturePolicy::Fixed(DEFAULT_FIXED_NODES)
    }

    /// Short tag for reports: "adaptive" or "fixed:<k>".
    pub fn tag(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for QuadraturePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadraturePolicy::Adaptive { .. } => f.write_str("adaptive"),
            QuadraturePolicy::Fixed(k) => write!(f, "fixed:{k}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown quadrature policy {0:?} (expected adaptive or fixed:<k>)")]
pub struct ParsePolicyError(pub String);

impl FromStr for QuadraturePolicy {
    type Err = ParsePolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("adaptive") {
            return Ok(QuadraturePolicy::default());
        }
        if t.eq_ignore_ascii_case("fixed") {
            return Ok(QuadraturePolicy::fixed_default());
        }
        if let Some(k) = t.strip_prefix("fixed:") {
            if let Ok(k) = k.trim().parse::<usize>() {
                if k > 0 {
                    return Ok(QuadraturePolicy::Fixed(k));
                }
            }
        }
        Err(ParsePolicyError(s.to_string()))
    }
}

/// Region membership of the point (rho, z, lambda), straight from the three
/// conditions: some vertex above the piston, all vertices inside the
/// cylinder, some vertex below the rim and outside the cap sphere.
pub fn indicator(hull: &ConvexHull, rho: f64, z: f64, lambda: f64, g: &PistonGeometry) -> bool {
    let v = hull.vertices();
    let lr_sq = (lambda * g.r) * (lambda * g.r);
    let crosses_piston = v.iter().any(|p| z + p[2] > lambda * g.a);
    let inside_wall = v.iter().all(|p| envelope::rho_sq(p, rho) < lr_sq);
    let through_cap = match g.head {
        Head::Flat => v.iter().any(|p| z + p[2] < 0.0),
        Head::Spherical(cap) => {
            let c0 = g.c0().unwrap_or(0.0);
            let lcap_sq = (lambda * cap) * (lambda * cap);
            v.iter().any(|p| {
                let h = z + p[2];
                let dz = h - lambda * c0;
                h < 0.0 && envelope::rho_sq(p, rho) + dz * dz > lcap_sq
            })
        }
    };
    crosses_piston && inside_wall && through_cap
}

/// Smallest lambda for which the hull at offset rho fits inside the cylinder.
pub fn lambda_lower_bound(hull: &ConvexHull, rho: f64, g: &PistonGeometry) -> f64 {
    EnvelopeSolver::new(hull, *g).lambda_lower_bound(rho)
}

/// Upper envelope of the cap curves at offset rho, truncated where the
/// window [lambda a - z_max, U(lambda)] closes. A flat head yields a single
/// constant piece.
pub fn upper_envelope(hull: &ConvexHull, rho: f64, g: &PistonGeometry) -> RegionEnvelope {
    EnvelopeSolver::new(hull, *g).envelope(rho)
}

/// A(rho): area of the (z, lambda) region at offset rho.
pub fn inner_area(hull: &ConvexHull, rho: f64, g: &PistonGeometry) -> Result<f64, RegionError> {
    let mut solver = EnvelopeSolver::new(hull, *g);
    let mut pieces = Vec::new();
    checked_area(&mut solver, hull, rho, &mut pieces)
}

/// Bound on A(rho): the window never exceeds dz - lambda a and starts at lambda >= 0.
fn area_scale(hull: &ConvexHull, g: &PistonGeometry) -> f64 {
    let dz = hull.z_extent();
    dz * dz / (2.0 * g.a)
}

fn checked_area(
    solver: &mut EnvelopeSolver<'_>,
    hull: &ConvexHull,
    rho: f64,
    pieces: &mut Vec<EnvelopePiece>,
) -> Result<f64, RegionError> {
    let value = solver.area(rho, pieces);
    if value >= 0.0 {
        return Ok(value);
    }
    if value >= -1e-12 * area_scale(hull, solver.geometry()) {
        return Ok(0.0);
    }
    Err(RegionError::NegativeArea {
        stream_index: hull.stream_index(),
        rho,
        value,
    })
}

/// Largest rho with a non-empty region: r dz / a, plus a small guard.
pub fn rho_max(hull: &ConvexHull, g: &PistonGeometry) -> f64 {
    g.r * hull.z_extent() / g.a * (1.0 + RHO_GUARD)
}

/// Intervals of [0, rho_max] on which A(rho) > 0.
///
/// A(rho) > 0 exactly when the window is open at lambda_start(rho), so the
/// sign of that window is scanned on a grid and its zeros bisected.
pub fn rho_support(hull: &ConvexHull, g: &PistonGeometry) -> Vec<(f64, f64)> {
    let solver = EnvelopeSolver::new(hull, *g);
    support_of(&solver, rho_max(hull, g))
}

fn support_of(solver: &EnvelopeSolver<'_>, rho_hi: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if !(rho_hi > 0.0) {
        return out;
    }
    let w = |rho: f64| solver.start_window(rho);
    let edge = |mut inside: f64, mut outside: f64| {
        for _ in 0..80 {
            let mid = 0.5 * (inside + outside);
            if mid == inside || mid == outside {
                break;
            }
            if w(mid) > 0.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        0.5 * (inside + outside)
    };
    let step = rho_hi / SUPPORT_SCAN_POINTS as f64;
    let mut prev_rho = 0.0;
    let mut prev_in = w(0.0) > 0.0;
    let mut start = if prev_in { Some(0.0) } else { None };
    for k in 1..=SUPPORT_SCAN_POINTS {
        let rho = if k == SUPPORT_SCAN_POINTS { rho_hi } else { step * k as f64 };
        let now_in = w(rho) > 0.0;
        match (prev_in, now_in) {
            (false, true) => start = Some(edge(rho, prev_rho)),
            (true, false) => {
                let end = edge(prev_rho, rho);
                if let Some(s) = start.take() {
                    if end > s {
                        out.push((s, end));
                    }
                }
            }
            _ => {}
        }
        prev_rho = rho;
        prev_in = now_in;
    }
    if let Some(s) = start {
        if rho_hi > s {
            out.push((s, rho_hi));
        }
    }
    out
}

/// Offsets in (lo, hi) where the vertex farthest from the axis changes.
///
/// lambda_start(rho) is the square root of the upper envelope of the lines
/// 2 x_i rho + x_i^2 + y_i^2 (plus the common rho^2), so A(rho) has a kink
/// at every breakpoint of that envelope and is smooth in between.
pub fn wall_breakpoints(hull: &ConvexHull, lo: f64, hi: f64) -> Vec<f64> {
    let v = hull.vertices();
    let line = |i: usize, rho: f64| 2.0 * v[i][0] * rho + v[i][0] * v[i][0] + v[i][1] * v[i][1];
    let mut out = Vec::new();
    let mut rho = lo;
    let mut cur = (0..v.len())
        .max_by(|&i, &j| {
            line(i, rho)
                .total_cmp(&line(j, rho))
                .then(v[i][0].total_cmp(&v[j][0]))
        })
        .expect("hull has vertices");
    for _ in 0..v.len() {
        let mut next = (hi, None);
        for j in 0..v.len() {
            let slope = v[j][0] - v[cur][0];
            if slope <= 0.0 {
                continue;
            }
            let x = (line(cur, 0.0) - line(j, 0.0)) / (2.0 * slope);
            if x > rho && x < next.0 {
                next = (x, Some(j));
            }
        }
        match next {
            (x, Some(j)) => {
                out.push(x);
                rho = x;
                cur = j;
            }
            (_, None) => break,
        }
    }
    out
}

/// Support intervals split at the wall breakpoints.
fn smooth_panels(hull: &ConvexHull, support: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut panels = Vec::with_capacity(support.len() * 4);
    for &(lo, hi) in support {
        let mut left = lo;
        for x in wall_breakpoints(hull, lo, hi) {
            if x - left > 1e-12 * hi {
                panels.push((left, x));
                left = x;
            }
        }
        panels.push((left, hi));
    }
    panels
}

/// Reusable evaluator for many hulls at one geometry and policy. Keeps the
/// fixed rule's nodes so they are computed once.
#[derive(Debug, Clone)]
pub struct WeightEvaluator {
    geometry: PistonGeometry,
    policy: QuadraturePolicy,
    rule: Option<GaussLegendre>,
}

impl WeightEvaluator {
    pub fn new(geometry: PistonGeometry, policy: QuadraturePolicy) -> Result<Self, RegionError> {
        let rule = match policy {
            QuadraturePolicy::Fixed(0) => return Err(RegionError::NoNodes),
            QuadraturePolicy::Fixed(k) => Some(GaussLegendre::new(k)),
            QuadraturePolicy::Adaptive { .. } => None,
        };
        Ok(WeightEvaluator {
            geometry,
            policy,
            rule,
        })
    }

    pub fn geometry(&self) -> &PistonGeometry {
        &self.geometry
    }

    pub fn policy(&self) -> QuadraturePolicy {
        self.policy
    }

    /// I = int_0^{rho_max} rho A(rho) drho.
    pub fn weight(&self, hull: &ConvexHull) -> Result<f64, RegionError> {
        let g = self.geometry;
        let rho_hi = rho_max(hull, &g);
        if !(rho_hi > 0.0) {
            return Ok(0.0);
        }
        let mut solver = EnvelopeSolver::new(hull, g);
        let panels = smooth_panels(hull, &support_of(&solver, rho_hi));
        let mut pieces = Vec::with_capacity(16);
        let mut failure: Option<RegionError> = None;
        let mut total = 0.0;
        for &(lo, hi) in &panels {
            let mut f = |rho: f64| match checked_area(&mut solver, hull, rho, &mut pieces) {
                Ok(area) => rho * area,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            };
            total += match (&self.rule, self.policy) {
                (Some(rule), _) => rule.integrate(&mut f, lo, hi),
                (None, QuadraturePolicy::Adaptive { abs_factor, rel }) => {
                    let scale = area_scale(hull, &g) * g.r * g.r;
                    let tol = Tolerance {
                        abs: abs_factor * scale,
                        rel,
                        ..Tolerance::default()
                    };
                    quadrature::adaptive(&mut f, lo, hi, tol)
                        .map_err(|source| RegionError::Quadrature {
                            stream_index: hull.stream_index(),
                            source,
                        })?
                        .value
                }
                (None, QuadraturePolicy::Fixed(_)) => unreachable!("fixed policy carries a rule"),
            };
            if let Some(e) = failure.take() {
                return Err(e);
            }
        }
        Ok(total.max(0.0))
    }
}

/// Weight of one hull; see [`WeightEvaluator`] for repeated use.
pub fn hull_weight(
    hull: &ConvexHull,
    g: &PistonGeometry,
    quad: QuadraturePolicy,
) -> Result<f64, RegionError> {
    WeightEvaluator::new(*g, quad)?.weight(hull)
}
