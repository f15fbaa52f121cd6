//! Convex hulls of unit loops.
//!
//! For a convex domain a loop lies inside iff its convex hull does, so the
//! estimator only ever looks at hull vertices. Hulls are small (tens to a
//! few hundred vertices) compared with the loops they come from.

mod cache;
mod quickhull;
mod stats;

use thiserror::Error;

use crate::bridges::{BridgeError, Point3, UnitLoop};

pub use cache::{decode_hulls, encode_hulls, load_hulls, save_hulls, CacheError, HullCache};
pub use cache::{CACHE_MAGIC, CACHE_VERSION};
pub use stats::{generate_hulls, hull_statistics, HullEnsemble, HullStats, HullStatsRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HullError {
    #[error("cannot build a hull from an empty point set")]
    Empty,
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("scale must be positive and finite, got {0}")]
    Scale(f64),
    #[error("hull statistics need at least {min} loops per n, got {loops}")]
    TooFewLoops { loops: usize, min: usize },
    #[error(transparent)]
    Bridge(#[from] BridgeError),
}

/// Convex hull of a point set, with vertex z-extremes cached.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexHull {
    vertices: Vec<Point3>,
    faces: Vec<[u32; 3]>,
    z_min: f64,
    z_max: f64,
    source_n: u64,
    stream_index: u64,
    dimension: u8,
}

impl ConvexHull {
    /// Wrap a set of points already known to be extreme (e.g. read back from
    /// a cache). No faces are attached.
    pub fn from_vertices(
        vertices: Vec<Point3>,
        source_n: u64,
        stream_index: u64,
    ) -> Result<Self, HullError> {
        if vertices.is_empty() {
            return Err(HullError::Empty);
        }
        check_finite(&vertices)?;
        let dimension = affine_dimension(&vertices);
        Ok(Self::assemble(vertices, Vec::new(), source_n, stream_index, dimension))
    }

    fn assemble(
        vertices: Vec<Point3>,
        faces: Vec<[u32; 3]>,
        source_n: u64,
        stream_index: u64,
        dimension: u8,
    ) -> Self {
        let (mut z_min, mut z_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in &vertices {
            z_min = z_min.min(v[2]);
            z_max = z_max.max(v[2]);
        }
        ConvexHull {
            vertices,
            faces,
            z_min,
            z_max,
            source_n,
            stream_index,
            dimension,
        }
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    /// Outward-oriented triangles indexing [`Self::vertices`]; empty for
    /// degenerate hulls and for hulls loaded from a cache.
    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn z_min(&self) -> f64 {
        self.z_min
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn z_extent(&self) -> f64 {
        self.z_max - self.z_min
    }

    /// Step count of the loop this hull was built from.
    pub fn source_n(&self) -> u64 {
        self.source_n
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Affine dimension of the vertex set (0 to 3).
    pub fn dimension(&self) -> u8 {
        self.dimension
    }

    /// Point, segment or polygon rather than a solid.
    pub fn is_degenerate(&self) -> bool {
        self.dimension < 3
    }

    /// Drop the triangulation, keeping only what the estimator needs.
    pub fn without_faces(mut self) -> Self {
        self.faces = Vec::new();
        self
    }

    /// The vertex set scaled about the origin and then translated:
    /// `offset + scale * v` for every vertex.
    pub fn transform(&self, scale: f64, offset: Point3) -> Result<Vec<Point3>, HullError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(HullError::Scale(scale));
        }
        Ok(self
            .vertices
            .iter()
            .map(|v| {
                [
                    offset[0] + scale * v[0],
                    offset[1] + scale * v[1],
                    offset[2] + scale * v[2],
                ]
            })
            .collect())
    }
}

fn check_finite(points: &[Point3]) -> Result<(), HullError> {
    match points.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
        Some(index) => Err(HullError::NonFinite { index }),
        None => Ok(()),
    }
}

fn affine_dimension(points: &[Point3]) -> u8 {
    match quickhull::build(points) {
        quickhull::Construction::Solid { .. } => 3,
        quickhull::Construction::Flat { dimension, .. } => dimension,
    }
}

/// Convex hull of a loop's points.
pub fn convex_hull(lp: &UnitLoop) -> Result<ConvexHull, HullError> {
    hull_of_points(lp.points(), lp.n() as u64, lp.stream().stream_index)
}

/// Convex hull of an arbitrary point set.
///
/// Collinear or coplanar inputs are not errors: they produce a hull with
/// `dimension() < 3` holding the extreme points of the lower-dimensional set.
pub fn hull_of_points(
    points: &[Point3],
    source_n: u64,
    stream_index: u64,
) -> Result<ConvexHull, HullError> {
    if points.is_empty() {
        return Err(HullError::Empty);
    }
    check_finite(points)?;
    Ok(match quickhull::build(points) {
        quickhull::Construction::Solid { vertices, faces } => {
            let mut remap = std::collections::HashMap::with_capacity(vertices.len());
            let coords: Vec<Point3> = vertices
                .iter()
                .enumerate()
                .map(|(k, &i)| {
                    remap.insert(i, k as u32);
                    points[i]
                })
                .collect();
            let faces = faces
                .iter()
                .map(|f| [remap[&f[0]], remap[&f[1]], remap[&f[2]]])
                .collect();
            ConvexHull::assemble(coords, faces, source_n, stream_index, 3)
        }
        quickhull::Construction::Flat {
            dimension,
            vertices,
        } => {
            let coords = vertices.iter().map(|&i| points[i]).collect();
            ConvexHull::assemble(coords, Vec::new(), source_n, stream_index, dimension)
        }
    })
}

/// Largest signed distance of `p` above any face plane of `hull`
/// (non-positive for points inside). Requires a solid hull with faces.
pub fn max_face_distance(hull: &ConvexHull, p: &Point3) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for f in hull.faces() {
        let a = hull.vertices[f[0] as usize];
        let b = hull.vertices[f[1] as usize];
        let c = hull.vertices[f[2] as usize];
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let n = [
            u[1] * w[2] - u[2] * w[1],
            u[2] * w[0] - u[0] * w[2],
            u[0] * w[1] - u[1] * w[0],
        ];
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if len == 0.0 {
            continue;
        }
        let d = (n[0] * (p[0] - a[0]) + n[1] * (p[1] - a[1]) + n[2] * (p[2] - a[2])) / len;
        worst = worst.max(d);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridges::{sample_bridge, RngStream};

    #[test]
    fn simplex_with_repeats_and_interior() {
        let pts = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0],
            [0.2, 0.2, 0.2],
        ];
        let h = hull_of_points(&pts, 6, 0).unwrap();
        assert_eq!(h.vertex_count(), 4);
        assert!(!h.is_degenerate());
        assert!(!h.vertices().contains(&[0.2, 0.2, 0.2]));
        assert_eq!(h.z_min(), 0.0);
        assert_eq!(h.z_max(), 1.0);
    }

    #[test]
    fn empty_and_non_finite_rejected() {
        assert_eq!(hull_of_points(&[], 0, 0), Err(HullError::Empty));
        assert_eq!(
            hull_of_points(&[[0.0; 3], [f64::NAN, 0.0, 0.0]], 1, 0),
            Err(HullError::NonFinite { index: 1 })
        );
        assert_eq!(ConvexHull::from_vertices(vec![], 0, 0), Err(HullError::Empty));
    }

    #[test]
    fn degenerate_loop_is_flagged() {
        let lp = sample_bridge(1, RngStream::new(0, 0)).unwrap();
        let h = convex_hull(&lp).unwrap();
        assert!(h.is_degenerate());
        assert_eq!(h.dimension(), 0);
        assert_eq!(h.vertices(), &[[0.0; 3]]);
        // two steps: a segment through the origin
        let lp = sample_bridge(2, RngStream::new(0, 3)).unwrap();
        let h = convex_hull(&lp).unwrap();
        assert_eq!(h.dimension(), 1);
        // three steps: a triangle
        let lp = sample_bridge(3, RngStream::new(0, 3)).unwrap();
        assert_eq!(convex_hull(&lp).unwrap().dimension(), 2);
    }

    #[test]
    fn loop_hull_contains_origin_extent() {
        let lp = sample_bridge(2000, RngStream::new(5, 1)).unwrap();
        let h = convex_hull(&lp).unwrap();
        assert!(h.z_min() <= 0.0 && h.z_max() >= 0.0);
        assert_eq!(h.source_n(), 2000);
        assert_eq!(h.stream_index(), 1);
        assert!((h.z_extent() - lp.extent(2)).abs() == 0.0);
        for p in lp.points() {
            assert!(max_face_distance(&h, p) <= 1e-12);
        }
    }

    #[test]
    fn transform_behaviour() {
        let lp = sample_bridge(500, RngStream::new(1, 2)).unwrap();
        let h = convex_hull(&lp).unwrap();
        assert_eq!(h.transform(1.0, [0.0; 3]).unwrap(), h.vertices());
        let t = h.transform(2.0, [0.3, -1.0, 4.0]).unwrap();
        let (lo, hi) = t.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[2]), hi.max(p[2]))
        });
        assert!(((hi - lo) - 2.0 * h.z_extent()).abs() < 1e-14);
        assert_eq!(h.transform(0.0, [0.0; 3]), Err(HullError::Scale(0.0)));
        assert!(h.transform(-1.0, [0.0; 3]).is_err());
    }
}
