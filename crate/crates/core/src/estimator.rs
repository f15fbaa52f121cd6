//! Hull weights to energies: E = -(1/2 pi) <I>, with naive standard errors
//! over independent hulls.
//!
//! Weights are computed in parallel but always collected and summed in
//! stream order (compensated, fixed chunking), so a result does not depend
//! on the thread count.

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::hulls::ConvexHull;
use crate::piston_region::{
    GeometryError, Head, PistonGeometry, QuadraturePolicy, RegionError, WeightEvaluator,
};
use crate::quadrature::CompensatedSum;
use crate::reference::{self, ReferenceEnergies, ReferenceError};

/// Summation chunk; partial sums are merged in index order.
const CHUNK: usize = 1024;

pub const ENERGY_CSV_HEADER: [&str; 10] = [
    "a_over_r",
    "R_over_r",
    "E_times_r",
    "stderr_times_r",
    "E_semiclassical",
    "E_asymptotic",
    "E_pfa",
    "n_hulls",
    "points_per_loop",
    "seed",
];

pub const DELTA_CSV_HEADER: [&str; 6] = [
    "a_over_r",
    "dE_times_r",
    "stderr_times_r",
    "E_times_r",
    "E_semiclassical",
    "n_hulls",
];

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("an energy estimate needs at least 2 hulls, got {0}")]
    TooFewHulls(usize),
    #[error("hull {stream_index} has non-finite weight {value}")]
    NonFinite { stream_index: u64, value: f64 },
    #[error("hulls come from loops of different sizes ({first} and {other} points)")]
    MixedPointCounts { first: u64, other: u64 },
    #[error("residual table needs R = r, got R/r = {0}")]
    NotHemisphere(f64),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Reference(#[from] ReferenceError),
    #[error("writing CSV: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyEstimate {
    pub geometry: PistonGeometry,
    /// In units hbar c / length.
    pub mean_energy: f64,
    pub std_error: f64,
    pub n_hulls: usize,
    pub points_per_loop: u64,
    pub quadrature: QuadraturePolicy,
}

impl EnergyEstimate {
    pub fn energy_times_r(&self) -> f64 {
        self.mean_energy * self.geometry.r
    }

    pub fn std_error_times_r(&self) -> f64 {
        self.std_error * self.geometry.r
    }
}

/// Per-hull weights I in stream order.
pub fn hull_weights(
    hulls: &[ConvexHull],
    g: &PistonGeometry,
    quad: QuadraturePolicy,
) -> Result<Vec<f64>, EstimatorError> {
    let eval = WeightEvaluator::new(*g, quad)?;
    let weights: Vec<f64> = hulls
        .par_iter()
        .map(|h| eval.weight(h))
        .collect::<Result<_, _>>()?;
    for (h, &w) in hulls.iter().zip(&weights) {
        if !w.is_finite() {
            return Err(EstimatorError::NonFinite {
                stream_index: h.stream_index(),
                value: w,
            });
        }
    }
    Ok(weights)
}

/// Compensated sum of `f(x)` over `values`, chunked so the result is fixed.
fn ordered_sum(values: &[f64], f: impl Fn(f64) -> f64 + Sync) -> f64 {
    let partials: Vec<CompensatedSum> = values
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(|&x| f(x)).collect())
        .collect();
    let mut total = CompensatedSum::new();
    for p in &partials {
        total.merge(p);
    }
    total.value()
}

/// Mean and standard error of -I / 2 pi.
pub fn energy_from_weights(weights: &[f64]) -> Result<(f64, f64), EstimatorError> {
    let n = weights.len();
    if n < 2 {
        return Err(EstimatorError::TooFewHulls(n));
    }
    let scale = -1.0 / (2.0 * PI);
    let mean = ordered_sum(weights, |w| w) / n as f64;
    let ss = ordered_sum(weights, |w| (w - mean) * (w - mean));
    let sd = (ss / (n - 1) as f64).sqrt();
    // + 0.0 turns -0 into 0 for all-zero weights
    Ok((scale * mean + 0.0, sd / (2.0 * PI) / (n as f64).sqrt()))
}

fn points_per_loop(hulls: &[ConvexHull]) -> Result<u64, EstimatorError> {
    let first = hulls.first().map_or(0, |h| h.source_n());
    match hulls.iter().find(|h| h.source_n() != first) {
        Some(h) => Err(EstimatorError::MixedPointCounts {
            first,
            other: h.source_n(),
        }),
        None => Ok(first),
    }
}

pub fn estimate_energy(
    hulls: &[ConvexHull],
    g: &PistonGeometry,
    quad: QuadraturePolicy,
) -> Result<EnergyEstimate, EstimatorError> {
    if hulls.len() < 2 {
        return Err(EstimatorError::TooFewHulls(hulls.len()));
    }
    let points = points_per_loop(hulls)?;
    let weights = hull_weights(hulls, g, quad)?;
    let (mean_energy, std_error) = energy_from_weights(&weights)?;
    Ok(EnergyEstimate {
        geometry: *g,
        mean_energy,
        std_error,
        n_hulls: hulls.len(),
        points_per_loop: points,
        quadrature: quad,
    })
}

/// One line of a sweep; energies are multiplied by r.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub a_over_r: f64,
    /// Infinite for a flat head.
    pub cap_over_r: f64,
    pub e_times_r: f64,
    pub stderr_times_r: f64,
    pub semiclassical: f64,
    pub asymptotic: f64,
    pub pfa: f64,
    pub n_hulls: usize,
    pub points_per_loop: u64,
    pub seed: u64,
}

impl SweepRow {
    pub fn from_estimate(est: &EnergyEstimate, seed: u64) -> Result<Self, EstimatorError> {
        let g = est.geometry;
        let refs = ReferenceEnergies::at(&g)?;
        Ok(SweepRow {
            a_over_r: g.a_over_r(),
            cap_over_r: g.cap_over_r(),
            e_times_r: est.energy_times_r(),
            stderr_times_r: est.std_error_times_r(),
            semiclassical: refs.semiclassical * g.r,
            asymptotic: refs.asymptotic * g.r,
            pfa: refs.pfa * g.r,
            n_hulls: est.n_hulls,
            points_per_loop: est.points_per_loop,
            seed,
        })
    }

    pub fn csv_fields(&self) -> [String; 10] {
        [
            num(self.a_over_r),
            num(self.cap_over_r),
            num(self.e_times_r),
            num(self.stderr_times_r),
            num(self.semiclassical),
            num(self.asymptotic),
            num(self.pfa),
            self.n_hulls.to_string(),
            self.points_per_loop.to_string(),
            self.seed.to_string(),
        ]
    }
}

/// Shortest round-trip decimal; infinity as "inf".
fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

/// Cap settings of a sweep, as multiples of r.
pub fn cap_ratio_head(ratio: Option<f64>, r: f64) -> Head {
    match ratio {
        None => Head::Flat,
        Some(q) => Head::Spherical(q * r),
    }
}

/// Energies on the grid `caps x a_values` with one hull ensemble for all
/// rows. `caps` holds R/r ratios, `None` meaning a flat head; `a_over_r`
/// is in units of `r`. Rows are ordered by cap, then by a.
pub fn sweep(
    r: f64,
    a_over_r: &[f64],
    caps: &[Option<f64>],
    hulls: &[ConvexHull],
    quad: QuadraturePolicy,
    seed: u64,
) -> Result<Vec<SweepRow>, EstimatorError> {
    let mut rows = Vec::with_capacity(a_over_r.len() * caps.len());
    for &cap in caps {
        for &a in a_over_r {
            let g = PistonGeometry::new(a * r, r, cap_ratio_head(cap, r))?;
            let est = estimate_energy(hulls, &g, quad)?;
            rows.push(SweepRow::from_estimate(&est, seed)?);
        }
    }
    Ok(rows)
}

pub fn write_energy_csv<W: Write>(mut out: W, rows: &[SweepRow]) -> Result<(), EstimatorError> {
    writeln!(out, "{}", ENERGY_CSV_HEADER.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.csv_fields().join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Residual Delta E = E + 1/(96 pi a) of a hemispherical head; energies times r.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRow {
    pub a_over_r: f64,
    pub delta_times_r: f64,
    pub stderr_times_r: f64,
    /// Monte Carlo energy; for the a = 0 row the periodic-orbit value.
    pub e_times_r: f64,
    /// -1/(96 pi a) times r; zero for the a = 0 row.
    pub semiclassical_times_r: f64,
    pub n_hulls: usize,
}

impl DeltaRow {
    pub fn csv_fields(&self) -> [String; 6] {
        [
            num(self.a_over_r),
            num(self.delta_times_r),
            num(self.stderr_times_r),
            num(self.e_times_r),
            num(self.semiclassical_times_r),
            self.n_hulls.to_string(),
        ]
    }
}

/// Residual table for estimates at R = r, led by the a = 0 periodic-orbit
/// point. The subtracted term is exact, so errors carry over unchanged.
pub fn delta_to_semiclassical(estimates: &[EnergyEstimate]) -> Result<Vec<DeltaRow>, EstimatorError> {
    let mut rows = Vec::with_capacity(estimates.len() + 1);
    let mut radius = None;
    for est in estimates {
        let g = est.geometry;
        match g.head {
            Head::Spherical(cap) if cap == g.r => {}
            _ => return Err(EstimatorError::NotHemisphere(g.cap_over_r())),
        }
        radius.get_or_insert(g.r);
        let sc = -1.0 / (96.0 * PI * g.a);
        rows.push(DeltaRow {
            a_over_r: g.a_over_r(),
            delta_times_r: (est.mean_energy - sc) * g.r,
            stderr_times_r: est.std_error_times_r(),
            e_times_r: est.energy_times_r(),
            semiclassical_times_r: sc * g.r,
            n_hulls: est.n_hulls,
        });
    }
    let r = radius.unwrap_or(1.0);
    let po = reference::periodic_orbit_energy(r)?;
    rows.insert(
        0,
        DeltaRow {
            a_over_r: 0.0,
            delta_times_r: po * r,
            stderr_times_r: 0.0,
            e_times_r: po * r,
            semiclassical_times_r: 0.0,
            n_hulls: 0,
        },
    );
    Ok(rows)
}

pub fn write_delta_csv<W: Write>(mut out: W, rows: &[DeltaRow]) -> Result<(), EstimatorError> {
    writeln!(out, "{}", DELTA_CSV_HEADER.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.csv_fields().join(","))?;
    }
    out.flush()?;
    Ok(())
}
