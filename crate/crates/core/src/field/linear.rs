//! Piecewise-linear interpolation of targets over the triangulation.

use crate::geom::{Aabb, Vec2};
use crate::mesh::TriMesh;

const INSIDE_TOL: f64 = 1e-12;

/// Barycentric coordinates of `v` in `tri`, or `None` for a zero-area triangle.
pub fn barycentric(tri: [Vec2; 3], v: Vec2) -> Option<[f64; 3]> {
    let [a, b, c] = tri;
    let area = (b - a).cross(c - a);
    if area == 0.0 || !area.is_finite() {
        return None;
    }
    let l0 = (b - v).cross(c - v) / area;
    let l1 = (c - v).cross(a - v) / area;
    Some([l0, l1, 1.0 - l0 - l1])
}

/// Uniform-grid point location over the triangles at a given set of positions.
///
/// Works for any triangle soup, so relaxed (non-convex) layouts and the
/// occasional inverted triangle during interpolation are handled alike.
#[derive(Debug, Clone)]
pub struct TriangleLocator<'a> {
    mesh: &'a TriMesh,
    positions: &'a [Vec2],
    bounds: Aabb,
    cell: f64,
    gx: usize,
    gy: usize,
    cell_offsets: Vec<usize>,
    cell_tris: Vec<usize>,
    /// `(triangle, a, b)` for every edge without a neighbor.
    boundary: Vec<(usize, usize, usize)>,
}

impl<'a> TriangleLocator<'a> {
    pub fn new(mesh: &'a TriMesh, positions: &'a [Vec2]) -> TriangleLocator<'a> {
        let bounds = Aabb::of_points(positions).unwrap_or(Aabb {
            min: Vec2::ZERO,
            max: Vec2::ZERO,
        });
        let t = mesh.triangle_count().max(1);
        let w = bounds.width().max(f64::MIN_POSITIVE);
        let h = bounds.height().max(f64::MIN_POSITIVE);
        let cell = ((w * h) / t as f64).sqrt().max(w.max(h) / 4096.0);
        let gx = ((w / cell).ceil() as usize).max(1);
        let gy = ((h / cell).ceil() as usize).max(1);

        let cell_range = |tri: &[usize; 3]| {
            let ps = tri.map(|i| positions[i]);
            let lo = |k: f64, n: usize| (k.max(0.0) as usize).min(n - 1);
            let x0 = lo(((ps.iter().map(|p| p.x).fold(f64::INFINITY, f64::min)) - bounds.min.x) / cell, gx);
            let x1 = lo(((ps.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max)) - bounds.min.x) / cell, gx);
            let y0 = lo(((ps.iter().map(|p| p.y).fold(f64::INFINITY, f64::min)) - bounds.min.y) / cell, gy);
            let y1 = lo(((ps.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max)) - bounds.min.y) / cell, gy);
            (x0, x1, y0, y1)
        };

        let mut counts = vec![0usize; gx * gy + 1];
        for tri in &mesh.triangles {
            let (x0, x1, y0, y1) = cell_range(tri);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    counts[y * gx + x + 1] += 1;
                }
            }
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut cell_tris = vec![0usize; *counts.last().unwrap()];
        for (ti, tri) in mesh.triangles.iter().enumerate() {
            let (x0, x1, y0, y1) = cell_range(tri);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let c = y * gx + x;
                    cell_tris[fill[c]] = ti;
                    fill[c] += 1;
                }
            }
        }

        let mut boundary = Vec::new();
        for (ti, (tri, nb)) in mesh.triangles.iter().zip(&mesh.tri_neighbors).enumerate() {
            for k in 0..3 {
                if nb[k].is_none() {
                    boundary.push((ti, tri[(k + 1) % 3], tri[(k + 2) % 3]));
                }
            }
        }

        TriangleLocator {
            mesh,
            positions,
            bounds,
            cell,
            gx,
            gy,
            cell_offsets: counts,
            cell_tris,
            boundary,
        }
    }

    fn tri_positions(&self, t: usize) -> [Vec2; 3] {
        self.mesh.triangle_positions(t, self.positions)
    }

    /// Triangle containing `v` with its barycentric coordinates. Outside the
    /// mesh, the triangle owning the nearest boundary edge, with coordinates
    /// that extend its affine map.
    pub fn locate(&self, v: Vec2) -> Option<(usize, [f64; 3])> {
        if self.bounds.contains(v) {
            let cx = (((v.x - self.bounds.min.x) / self.cell) as usize).min(self.gx - 1);
            let cy = (((v.y - self.bounds.min.y) / self.cell) as usize).min(self.gy - 1);
            let c = cy * self.gx + cx;
            for &t in &self.cell_tris[self.cell_offsets[c]..self.cell_offsets[c + 1]] {
                if let Some(l) = barycentric(self.tri_positions(t), v) {
                    if l.iter().all(|&x| x >= -INSIDE_TOL) {
                        return Some((t, l));
                    }
                }
            }
        }
        let mut best: Option<(f64, usize)> = None;
        for &(t, a, b) in &self.boundary {
            let d = segment_distance_sq(v, self.positions[a], self.positions[b]);
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, t));
            }
        }
        let (_, t) = best?;
        barycentric(self.tri_positions(t), v).map(|l| (t, l))
    }

    /// Barycentric blend of `targets` at `v`.
    pub fn interpolate(&self, v: Vec2, targets: &[Vec2]) -> Option<Vec2> {
        let (t, l) = self.locate(v)?;
        let [a, b, c] = self.mesh.triangles[t];
        Some(targets[a] * l[0] + targets[b] * l[1] + targets[c] * l[2])
    }
}

fn segment_distance_sq(v: Vec2, a: Vec2, b: Vec2) -> f64 {
    let e = b - a;
    let len2 = e.norm_sq();
    let t = if len2 > 0.0 {
        ((v - a).dot(e) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a + e * t - v).norm_sq()
}

/// One-off linear interpolation; build a [`TriangleLocator`] for many queries.
pub fn linear_interp(v: Vec2, mesh: &TriMesh, positions: &[Vec2], targets: &[Vec2]) -> Option<Vec2> {
    TriangleLocator::new(mesh, positions).interpolate(v, targets)
}
