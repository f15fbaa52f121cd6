//! Closed-form and series reference values for the capped-cylinder piston.
//!
//! All quantities are in units with hbar = c = 1. Energies carry dimension
//! 1/length and forces 1/length^2, so with lengths measured in units of the
//! cylinder radius the returned numbers are r*E and r^2*F.

use std::f64::consts::PI;

use thiserror::Error;

use crate::piston_region::geometry::sag_offset;
use crate::piston_region::{Head, PistonGeometry};
use crate::quadrature::{self, QuadratureError, Tolerance};

/// Coefficient of sqrt(R^2 - r^2)/a^2 in the fitted small-a energy.
pub const FITTED_CURVATURE_COEFFICIENT: f64 = 0.00395;
/// Coefficient of 1/a in the fitted small-a energy.
pub const FITTED_HEMISPHERE_COEFFICIENT: f64 = 0.00326;

/// Default shell cutoff for the periodic-orbit double series.
pub const PERIODIC_ORBIT_SHELLS: usize = 2048;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReferenceError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("cap radius R = {cap} is smaller than the cylinder radius r = {r}")]
    CapTooSmall { cap: f64, r: f64 },
    #[error("series cutoff must be at least 3 shells, got {0}")]
    Cutoff(usize),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Boundary condition of the scalar field on all surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    /// Sign of the one-reflection force: attractive for Dirichlet.
    fn sign(self) -> f64 {
        match self {
            BoundaryCondition::Dirichlet => -1.0,
            BoundaryCondition::Neumann => 1.0,
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64, ReferenceError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ReferenceError::NonPositive { name, value })
    }
}

fn cap_offset(r: f64, cap: f64) -> Result<f64, ReferenceError> {
    positive("r", r)?;
    positive("R", cap)?;
    if cap < r {
        return Err(ReferenceError::CapTooSmall { cap, r });
    }
    Ok(sag_offset(cap, r))
}

fn tight() -> Tolerance {
    Tolerance {
        abs: 0.0,
        rel: 1e-12,
        max_intervals: 4000,
    }
}

/// Dirichlet scalar between two discs of area pi r^2 at separation a,
/// edge effects neglected: -pi^3 r^2 / (1440 a^3).
pub fn parallel_plates_energy(a: f64, r: f64) -> Result<f64, ReferenceError> {
    positive("a", a)?;
    positive("r", r)?;
    Ok(-PI.powi(3) * r * r / (1440.0 * a.powi(3)))
}

/// Heuristic small-a estimate -(pi^2/2880)(1/a)(sqrt(R^2-r^2)/a + 1).
pub fn asymptotic_energy(a: f64, r: f64, cap: f64) -> Result<f64, ReferenceError> {
    positive("a", a)?;
    let c0 = cap_offset(r, cap)?;
    Ok(-(PI * PI / 2880.0) / a * (c0 / a + 1.0))
}

/// Fit to the Monte Carlo data at small a for r <= R <= 1.02 r.
pub fn fitted_asymptotic_energy(a: f64, r: f64, cap: f64) -> Result<f64, ReferenceError> {
    positive("a", a)?;
    let c0 = cap_offset(r, cap)?;
    Ok(-(FITTED_CURVATURE_COEFFICIENT * c0 / (a * a) + FITTED_HEMISPHERE_COEFFICIENT / a))
}

/// Force from the closed path reflecting once off the piston near its rim,
/// expanded for small a: -+(1/(96 pi a^2))(2 sqrt(R^2-r^2)/a + 1).
pub fn semiclassical_force(
    a: f64,
    r: f64,
    cap: f64,
    bc: BoundaryCondition,
) -> Result<f64, ReferenceError> {
    positive("a", a)?;
    let c0 = cap_offset(r, cap)?;
    Ok(bc.sign() / (96.0 * PI * a * a) * (2.0 * c0 / a + 1.0))
}

/// Unexpanded one-reflection force,
/// -+(1/16 pi) int_0^r rho drho / (a + sqrt(R^2 - rho^2) - sqrt(R^2 - r^2))^4.
///
/// Integrated in u = sqrt(R^2 - rho^2), which removes the square-root edge at rho = r.
pub fn semiclassical_force_integral(
    a: f64,
    r: f64,
    cap: f64,
    bc: BoundaryCondition,
) -> Result<f64, ReferenceError> {
    positive("a", a)?;
    let c0 = cap_offset(r, cap)?;
    let integral = quadrature::adaptive(
        |u| u / (a + u - c0).powi(4),
        c0,
        cap,
        tight(),
    )?;
    Ok(bc.sign() / (16.0 * PI) * integral.value)
}

/// Dirichlet energy whose negative a-derivative is [`semiclassical_force`]:
/// -(1/96 pi)(sqrt(R^2-r^2)/a^2 + 1/a).
pub fn semiclassical_energy(a: f64, r: f64, cap: f64) -> Result<f64, ReferenceError> {
    positive("a", a)?;
    let c0 = cap_offset(r, cap)?;
    Ok(-(c0 / (a * a) + 1.0 / a) / (96.0 * PI))
}

/// Periodic-orbit contribution to the hemispherical piston energy at a = 0,
/// summed with the default shell cutoff.
pub fn periodic_orbit_energy(cap: f64) -> Result<f64, ReferenceError> {
    periodic_orbit_energy_with_cutoff(cap, PERIODIC_ORBIT_SHELLS)
}

/// Periodic-orbit energy (pi/128R)(1 + pi^2/45 + S) where
/// S = sum_{n>=3} sum_{1<=m<n/2} 30 sqrt2 cos(m pi/n) / (n^4 pi sin^2(m pi/n)).
///
/// Shells n <= `shells` are summed exactly. Shell n behaves as
/// K/(6 n^2) - K/(pi n^3) + O(n^-4) with K = 30 sqrt2/pi, so the remainder is
/// replaced by K/6 psi_1(N+1) - (K/pi) zeta(3, N+1), leaving an O(N^-3) error.
pub fn periodic_orbit_energy_with_cutoff(cap: f64, shells: usize) -> Result<f64, ReferenceError> {
    positive("R", cap)?;
    if shells < 3 {
        return Err(ReferenceError::Cutoff(shells));
    }
    let series = periodic_orbit_partial_sums(shells)
        .last()
        .copied()
        .unwrap_or(0.0);
    let k = 30.0 * std::f64::consts::SQRT_2 / PI;
    let tail = k / 6.0 * hurwitz_zeta(2, shells + 1) - k / PI * hurwitz_zeta(3, shells + 1);
    Ok(PI / (128.0 * cap) * (1.0 + PI * PI / 45.0 + series + tail))
}

/// Running shell sums of the double series, index i holding shells 3..=i+3.
pub fn periodic_orbit_partial_sums(shells: usize) -> Vec<f64> {
    let k = 30.0 * std::f64::consts::SQRT_2 / PI;
    let mut sums = Vec::with_capacity(shells.saturating_sub(2));
    let mut total = quadrature::CompensatedSum::new();
    for n in 3..=shells {
        let nf = n as f64;
        let mut shell = 0.0;
        // m = n/2 would contribute cos(pi/2) = 0.
        for m in 1..=(n - 1) / 2 {
            let (s, c) = (PI * m as f64 / nf).sin_cos();
            shell += c / (s * s);
        }
        total.add(k * shell / nf.powi(4));
        sums.push(total.value());
    }
    sums
}

/// Hurwitz zeta sum_{k>=q} k^-s for integer s >= 2, via Euler-Maclaurin
/// after summing the first terms directly.
fn hurwitz_zeta(s: i32, q: usize) -> f64 {
    const DIRECT: usize = 16;
    let sf = s as f64;
    let mut sum = 0.0;
    for k in q..q + DIRECT {
        sum += (k as f64).powi(-s);
    }
    let x = (q + DIRECT) as f64;
    // int_x^inf t^-s dt + f(x)/2 - sum B_2j/(2j)! f^(2j-1)(x)
    sum += x.powf(1.0 - sf) / (sf - 1.0) + 0.5 * x.powi(-s);
    let bernoulli = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0];
    let mut rising = sf; // s (s+1) ... (s+2j-2)
    let mut factorial = 2.0;
    let mut power = x.powi(-s - 1);
    for (j, b) in bernoulli.iter().enumerate() {
        sum += b / factorial * rising * power;
        let j2 = 2.0 * (j as f64 + 1.0);
        rising *= (sf + j2 - 1.0) * (sf + j2);
        factorial *= (j2 + 1.0) * (j2 + 2.0);
        power /= x * x;
    }
    sum
}

/// Piston-based proximity force approximation: the parallel-plate energy
/// density -pi^2/(1440 d^3) integrated over the piston with the local gap
/// d(rho) = a + sqrt(R^2 - rho^2) - sqrt(R^2 - r^2) measured along the axis.
pub fn pfa_energy(geometry: &PistonGeometry) -> Result<f64, ReferenceError> {
    let (a, r) = (geometry.a, geometry.r);
    match geometry.head {
        Head::Flat => parallel_plates_energy(a, r),
        Head::Spherical(cap) => {
            positive("a", a)?;
            let c0 = cap_offset(r, cap)?;
            let integral =
                quadrature::adaptive(|u| u / (a + u - c0).powi(3), c0, cap, tight())?;
            Ok(-(PI * PI / 1440.0) * 2.0 * PI * integral.value)
        }
    }
}

/// Local PFA gap at radial distance `rho` from the axis.
pub fn pfa_gap(geometry: &PistonGeometry, rho: f64) -> f64 {
    match geometry.head {
        Head::Flat => geometry.a,
        Head::Spherical(cap) => {
            geometry.a + ((cap - rho) * (cap + rho)).max(0.0).sqrt() - sag_offset(cap, geometry.r)
        }
    }
}

/// Reference energies tabulated next to every Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceEnergies {
    /// Energy of the one-reflection semiclassical force.
    pub semiclassical: f64,
    /// Heuristic small-a estimate.
    pub asymptotic: f64,
    pub pfa: f64,
}

impl ReferenceEnergies {
    /// For a flat head the parallel-plate energy stands in for the
    /// semiclassical and asymptotic columns, which diverge as R -> infinity.
    pub fn at(geometry: &PistonGeometry) -> Result<Self, ReferenceError> {
        let (a, r) = (geometry.a, geometry.r);
        let pfa = pfa_energy(geometry)?;
        Ok(match geometry.head {
            Head::Flat => {
                let plates = parallel_plates_energy(a, r)?;
                ReferenceEnergies {
                    semiclassical: plates,
                    asymptotic: plates,
                    pfa,
                }
            }
            Head::Spherical(cap) => ReferenceEnergies {
                semiclassical: semiclassical_energy(a, r, cap)?,
                asymptotic: asymptotic_energy(a, r, cap)?,
                pfa,
            },
        })
    }
}
