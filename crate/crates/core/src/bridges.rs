//! Discretized standard Brownian bridges ("unit loops") over unit proper time.
//!
//! A loop of `n` steps is the exact Gaussian bridge at the times k/n,
//! B_{k/n} = W_{k/n} - (k/n) W_1, built from a Wiener path with independent
//! N(0, 1/n) increments per component. Both endpoints sit exactly at the origin.

use rand::SeedableRng;
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

pub type Point3 = [f64; 3];

/// Default number of steps per loop.
pub const DEFAULT_POINTS_PER_LOOP: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BridgeError {
    #[error("a loop needs at least one step (n >= 1)")]
    NoSteps,
    #[error("moment estimates need at least two loops, got {0}")]
    TooFewLoops(usize),
}

/// Identifies one reproducible random stream: ChaCha8 keyed by the master
/// seed, with the stream index selecting an independent ChaCha stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        RngStream {
            master_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// A standard Brownian bridge pinned to the origin, sampled at n + 1 times.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitLoop {
    points: Vec<Point3>,
    stream: RngStream,
}

impl UnitLoop {
    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    /// Number of steps n (the loop holds n + 1 points).
    pub fn n(&self) -> usize {
        self.points.len() - 1
    }

    pub fn stream(&self) -> RngStream {
        self.stream
    }

    pub fn into_points(self) -> Vec<Point3> {
        self.points
    }

    /// max - min of the given coordinate over the loop.
    pub fn extent(&self, axis: usize) -> f64 {
        extent(&self.points, axis)
    }
}

pub(crate) fn extent(points: &[Point3], axis: usize) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = lo.min(p[axis]);
        hi = hi.max(p[axis]);
    }
    hi - lo
}

/// Sample one bridge of `n` steps from `stream`.
pub fn sample_bridge(n: usize, stream: RngStream) -> Result<UnitLoop, BridgeError> {
    let mut points = Vec::new();
    fill_bridge(n, stream, &mut points)?;
    Ok(UnitLoop { points, stream })
}

/// Like [`sample_bridge`] but writes into a reusable buffer.
pub fn fill_bridge(
    n: usize,
    stream: RngStream,
    points: &mut Vec<Point3>,
) -> Result<(), BridgeError> {
    if n == 0 {
        return Err(BridgeError::NoSteps);
    }
    let mut rng = stream.rng();
    let sigma = (1.0 / n as f64).sqrt();
    points.clear();
    points.reserve(n + 1);
    points.push([0.0; 3]);
    let mut w = [0.0f64; 3];
    for _ in 0..n {
        for wc in w.iter_mut() {
            let g: f64 = StandardNormal.sample(&mut rng);
            *wc += sigma * g;
        }
        points.push(w);
    }
    let end = w;
    let inv_n = 1.0 / n as f64;
    for (k, p) in points.iter_mut().enumerate() {
        let t = k as f64 * inv_n;
        for c in 0..3 {
            p[c] -= t * end[c];
        }
    }
    // Pin exactly: t = 1 removes W_1 up to rounding.
    points[n] = [0.0; 3];
    Ok(())
}

/// Sample mean and standard error of a set of values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl MeanEstimate {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.len() < 2 {
            return None;
        }
        let n = values.len() as f64;
        let mean: f64 = values
            .iter()
            .copied()
            .collect::<crate::quadrature::CompensatedSum>()
            .value()
            / n;
        let ss: f64 = values
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .collect::<crate::quadrature::CompensatedSum>()
            .value();
        let var = ss / (n - 1.0);
        Some(MeanEstimate {
            mean,
            std_error: (var / n).sqrt(),
            count: values.len(),
        })
    }

    /// (mean - target) / std_error, infinite when the error is zero and the mean is off.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = self.mean - target;
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    }
}

/// <(Delta z)^4>, the fourth power of the z-extent averaged over loops.
pub fn dz4_moment(loops: &[UnitLoop]) -> Result<MeanEstimate, BridgeError> {
    extent4_moment(loops, 2)
}

/// <(Delta)^4> of the extent along `axis`.
pub fn extent4_moment(loops: &[UnitLoop], axis: usize) -> Result<MeanEstimate, BridgeError> {
    let values: Vec<f64> = loops.iter().map(|l| l.extent(axis).powi(4)).collect();
    MeanEstimate::from_values(&values).ok_or(BridgeError::TooFewLoops(loops.len()))
}

/// <(Delta z)^4> over the loops of streams `0..count` of `master_seed`,
/// without keeping the loops in memory.
pub fn dz4_moment_of_streams(
    master_seed: u64,
    n: usize,
    count: usize,
) -> Result<MeanEstimate, BridgeError> {
    let values: Vec<f64> = (0..count as u64)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n + 1),
            |buf, i| {
                fill_bridge(n, RngStream::new(master_seed, i), buf)?;
                Ok(extent(buf, 2).powi(4))
            },
        )
        .collect::<Result<_, BridgeError>>()?;
    MeanEstimate::from_values(&values).ok_or(BridgeError::TooFewLoops(count))
}

/// pi^4/30, the continuum value of <(Delta z)^4> for a standard bridge.
pub const DZ4_CONTINUUM: f64 = std::f64::consts::PI
    * std::f64::consts::PI
    * std::f64::consts::PI
    * std::f64::consts::PI
    / 30.0;
