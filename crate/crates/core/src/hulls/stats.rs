use std::time::Instant;

use rayon::prelude::*;

use super::{hull_of_points, ConvexHull, HullError};
use crate::bridges::{fill_bridge, MeanEstimate, RngStream};

/// Minimum number of loops per n for [`hull_statistics`].
pub const MIN_LOOPS_PER_N: usize = 10;

/// Averages over the hulls of loops with a common step count.
#[derive(Debug, Clone, PartialEq)]
pub struct HullStatsRow {
    pub n: usize,
    pub samples: usize,
    pub degenerate: usize,
    pub mean_vertices: f64,
    pub se_vertices: f64,
    pub mean_faces: f64,
    pub se_faces: f64,
    /// Mean wall time per hull construction, seconds.
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HullStats {
    pub rows: Vec<HullStatsRow>,
}

impl HullStats {
    /// Mean vertex count strictly increasing in n.
    pub fn vertices_increase_with_n(&self) -> bool {
        let mut rows: Vec<&HullStatsRow> = self.rows.iter().collect();
        rows.sort_by_key(|r| r.n);
        rows.windows(2).all(|w| w[1].mean_vertices > w[0].mean_vertices)
    }
}

/// Hulls for stream indices `0..count` of `master_seed`, in stream order.
#[derive(Debug, Clone, PartialEq)]
pub struct HullEnsemble {
    pub master_seed: u64,
    pub points_per_loop: usize,
    /// Non-degenerate hulls only.
    pub hulls: Vec<ConvexHull>,
    pub degenerate: usize,
    pub stats: HullStatsRow,
}

/// Sample `count` loops of `n` steps, reduce each to its hull and collect
/// the solid ones. Degenerate hulls are skipped and counted. Faces are
/// dropped unless `keep_faces` is set.
pub fn generate_hulls(
    master_seed: u64,
    n: usize,
    count: usize,
    keep_faces: bool,
) -> Result<HullEnsemble, HullError> {
    let built: Vec<Result<(ConvexHull, f64), HullError>> = (0..count as u64)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n + 1),
            |buf, i| {
                fill_bridge(n, RngStream::new(master_seed, i), buf)?;
                let start = Instant::now();
                let hull = hull_of_points(buf, n as u64, i)?;
                Ok((hull, start.elapsed().as_secs_f64()))
            },
        )
        .collect();
    let mut hulls = Vec::with_capacity(count);
    let mut vertex_counts = Vec::with_capacity(count);
    let mut face_counts = Vec::with_capacity(count);
    let mut seconds = 0.0;
    let mut degenerate = 0;
    for item in built {
        let (hull, secs) = item?;
        seconds += secs;
        if hull.is_degenerate() {
            degenerate += 1;
            continue;
        }
        vertex_counts.push(hull.vertex_count() as f64);
        face_counts.push(hull.face_count() as f64);
        hulls.push(if keep_faces { hull } else { hull.without_faces() });
    }
    let v = MeanEstimate::from_values(&vertex_counts);
    let f = MeanEstimate::from_values(&face_counts);
    let stats = HullStatsRow {
        n,
        samples: hulls.len(),
        degenerate,
        mean_vertices: v.map_or(vertex_counts.first().copied().unwrap_or(0.0), |m| m.mean),
        se_vertices: v.map_or(0.0, |m| m.std_error),
        mean_faces: f.map_or(face_counts.first().copied().unwrap_or(0.0), |m| m.mean),
        se_faces: f.map_or(0.0, |m| m.std_error),
        mean_seconds: if count > 0 { seconds / count as f64 } else { 0.0 },
    };
    Ok(HullEnsemble {
        master_seed,
        points_per_loop: n,
        hulls,
        degenerate,
        stats,
    })
}

/// Vertex and face statistics for each n in `n_values`.
pub fn hull_statistics(
    n_values: &[usize],
    loops_per_n: usize,
    master_seed: u64,
) -> Result<HullStats, HullError> {
    if loops_per_n < MIN_LOOPS_PER_N {
        return Err(HullError::TooFewLoops {
            loops: loops_per_n,
            min: MIN_LOOPS_PER_N,
        });
    }
    let rows = n_values
        .iter()
        .map(|&n| generate_hulls(master_seed, n, loops_per_n, false).map(|e| e.stats))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HullStats { rows })
}
