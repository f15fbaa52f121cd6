use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("piston height a must be positive and finite, got {0}")]
    Height(f64),
    #[error("cylinder radius r must be positive and finite, got {0}")]
    Radius(f64),
    #[error("cap radius R must be finite and at least r = {r}, got {cap}")]
    Cap { cap: f64, r: f64 },
}

/// Shape of the cylinder head facing the piston.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Head {
    /// Planar head (the R = infinity limit).
    Flat,
    /// Spherical cap of the given radius R >= r, meeting the cylinder wall at z = 0.
    Spherical(f64),
}

/// Piston at height `a` in a cylinder of radius `r` closed by `head`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PistonGeometry {
    pub a: f64,
    pub r: f64,
    pub head: Head,
}

impl PistonGeometry {
    pub fn new(a: f64, r: f64, head: Head) -> Result<Self, GeometryError> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(GeometryError::Height(a));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(GeometryError::Radius(r));
        }
        if let Head::Spherical(cap) = head {
            if !(cap.is_finite() && cap >= r) {
                return Err(GeometryError::Cap { cap, r });
            }
        }
        Ok(PistonGeometry { a, r, head })
    }

    pub fn flat(a: f64, r: f64) -> Result<Self, GeometryError> {
        Self::new(a, r, Head::Flat)
    }

    pub fn spherical(a: f64, r: f64, cap: f64) -> Result<Self, GeometryError> {
        Self::new(a, r, Head::Spherical(cap))
    }

    /// Cap radius, `None` for a flat head.
    pub fn cap_radius(&self) -> Option<f64> {
        match self.head {
            Head::Flat => None,
            Head::Spherical(cap) => Some(cap),
        }
    }

    /// Height of the cap's sphere center above the rim plane, sqrt(R^2 - r^2).
    pub fn c0(&self) -> Option<f64> {
        self.cap_radius().map(|cap| sag_offset(cap, self.r))
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.head, Head::Flat)
    }

    /// Same configuration with every length multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self, GeometryError> {
        let head = match self.head {
            Head::Flat => Head::Flat,
            Head::Spherical(cap) => Head::Spherical(cap * s),
        };
        Self::new(self.a * s, self.r * s, head)
    }

    /// Same casing with a different piston height.
    pub fn with_height(&self, a: f64) -> Result<Self, GeometryError> {
        Self::new(a, self.r, self.head)
    }

    pub fn a_over_r(&self) -> f64 {
        self.a / self.r
    }

    /// R/r, infinite for a flat head.
    pub fn cap_over_r(&self) -> f64 {
        self.cap_radius().map_or(f64::INFINITY, |cap| cap / self.r)
    }
}

impl fmt::Display for PistonGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.head {
            Head::Flat => write!(f, "a={} r={} R=flat", self.a, self.r),
            Head::Spherical(cap) => write!(f, "a={} r={} R={}", self.a, self.r, cap),
        }
    }
}

/// sqrt(R^2 - r^2) without cancellation for R close to r.
pub(crate) fn sag_offset(cap: f64, r: f64) -> f64 {
    ((cap - r) * (cap + r)).max(0.0).sqrt()
}
