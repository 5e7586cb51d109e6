//! Triangulated layout substrate.
//!
//! A [`TriMesh`] keeps two position sets: the fixed projected positions and
//! the current positions that the layout moves. Edges live in CSR form
//! (`csr_offsets` / `csr_targets`, ascending per node). Incident triangles
//! live as triangle fans: for node `v`, `fan(v)` lists its neighbors in
//! counter-clockwise order so every consecutive pair `(a, b)` forms the
//! triangle `(v, a, b)`; interior fans also close from the last neighbor back
//! to the first.

mod delaunay;
pub mod predicates;

use std::fmt::Write as _;

use thiserror::Error;

pub use delaunay::{jitter_duplicates, DUPLICATE_TOLERANCE, JITTER_RADIUS};
pub use predicates::signed_area;

use crate::geom::Vec2;
use crate::projection::PointCloud2D;

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("all points are collinear")]
    DegenerateInput,
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("too many points ({0})")]
    TooManyPoints(usize),
    #[error("point {0} duplicates an inserted point")]
    DuplicatePoint(usize),
    #[error("triangle has zero area")]
    ZeroAreaTriangle,
    #[error("malformed mesh dump: {0}")]
    Parse(String),
    #[error("internal triangulation error: {0}")]
    Internal(&'static str),
}

/// Line through `point` with unit `normal` pointing at the vertex it guards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitingLine {
    pub point: Vec2,
    pub normal: Vec2,
}

impl LimitingLine {
    /// Signed distance, positive on the guarded vertex's side.
    #[inline]
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        self.normal.dot(p - self.point)
    }
}

/// The three midsegment lines of triangle `(a, b, c)`, one per vertex.
///
/// Line `k` passes through the midpoints of the two edges touching vertex
/// `k`, runs parallel to the opposite edge, and its normal points at vertex `k`.
pub fn limiting_lines(tri: [Vec2; 3]) -> Result<[LimitingLine; 3], MeshError> {
    if signed_area(tri[0], tri[1], tri[2]) == 0.0 {
        return Err(MeshError::ZeroAreaTriangle);
    }
    let line = |k: usize| {
        let v = tri[k];
        let b = tri[(k + 1) % 3];
        let c = tri[(k + 2) % 3];
        let point = (v + b) * 0.5;
        let n = (c - b).perp();
        let n = n / n.norm();
        let normal = if n.dot(v - point) < 0.0 { -n } else { n };
        LimitingLine { point, normal }
    };
    Ok([line(0), line(1), line(2)])
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub original: Vec<Vec2>,
    pub current: Vec<Vec2>,
    pub csr_offsets: Vec<usize>,
    pub csr_targets: Vec<usize>,
    pub fan_offsets: Vec<usize>,
    pub fan_nodes: Vec<usize>,
    /// Nodes on the convex hull have open fans.
    pub on_hull: Vec<bool>,
    /// Counter-clockwise at `original`.
    pub triangles: Vec<[usize; 3]>,
    /// Neighbor across the edge opposite vertex `k`, `None` on the hull.
    pub tri_neighbors: Vec<[Option<usize>; 3]>,
}

impl TriMesh {
    /// Assemble connectivity from counter-clockwise triangles.
    pub fn from_triangles(points: Vec<Vec2>, triangles: Vec<[usize; 3]>) -> TriMesh {
        let n = points.len();

        // Directed half-edges (v -> a) with the third vertex b of (v, a, b).
        let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut edge_owner = std::collections::HashMap::with_capacity(triangles.len() * 3);
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let v = tri[k];
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                incident[v].push((a, b));
                edge_owner.insert((a, b), (t, k));
            }
        }

        let tri_neighbors = triangles
            .iter()
            .map(|tri| {
                let mut nb = [None; 3];
                for (k, slot) in nb.iter_mut().enumerate() {
                    let a = tri[(k + 1) % 3];
                    let b = tri[(k + 2) % 3];
                    *slot = edge_owner.get(&(b, a)).map(|&(t, _)| t);
                }
                nb
            })
            .collect();

        let mut fan_offsets = Vec::with_capacity(n + 1);
        let mut fan_nodes = Vec::new();
        let mut on_hull = vec![false; n];
        let mut csr_offsets = Vec::with_capacity(n + 1);
        let mut csr_targets = Vec::new();
        fan_offsets.push(0);
        csr_offsets.push(0);
        for v in 0..n {
            let pairs = &incident[v];
            if !pairs.is_empty() {
                let next = |a: usize| pairs.iter().find(|p| p.0 == a).map(|p| p.1);
                let start = pairs
                    .iter()
                    .map(|p| p.0)
                    .find(|&a| !pairs.iter().any(|q| q.1 == a));
                on_hull[v] = start.is_some();
                let first = start.unwrap_or_else(|| pairs.iter().map(|p| p.0).min().unwrap());
                let mut cur = first;
                fan_nodes.push(cur);
                for _ in 0..pairs.len() {
                    match next(cur) {
                        Some(b) if b != first => {
                            fan_nodes.push(b);
                            cur = b;
                        }
                        _ => break,
                    }
                }
            }
            fan_offsets.push(fan_nodes.len());

            let mut nbrs: Vec<usize> = fan_nodes[fan_offsets[v]..].to_vec();
            nbrs.sort_unstable();
            csr_targets.extend(nbrs);
            csr_offsets.push(csr_targets.len());
        }

        TriMesh {
            current: points.clone(),
            original: points,
            csr_offsets,
            csr_targets,
            fan_offsets,
            fan_nodes,
            on_hull,
            triangles,
            tri_neighbors,
        }
    }

    pub fn node_count(&self) -> usize {
        self.original.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Undirected edge count.
    pub fn edge_count(&self) -> usize {
        self.csr_targets.len() / 2
    }

    pub fn hull_count(&self) -> usize {
        self.on_hull.iter().filter(|&&h| h).count()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.csr_targets[self.csr_offsets[v]..self.csr_offsets[v + 1]]
    }

    pub fn fan(&self, v: usize) -> &[usize] {
        &self.fan_nodes[self.fan_offsets[v]..self.fan_offsets[v + 1]]
    }

    /// `(a, b)` for every incident triangle `(v, a, b)`, counter-clockwise.
    pub fn fan_triangles(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let fan = self.fan(v);
        let closed = !self.on_hull[v] && fan.len() > 2;
        let len = fan.len();
        let count = if closed { len } else { len.saturating_sub(1) };
        (0..count).map(move |i| (fan[i], fan[(i + 1) % len]))
    }

    /// Every edge once, as `(low, high)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |v| {
            self.neighbors(v)
                .iter()
                .copied()
                .filter(move |&u| u > v)
                .map(move |u| (v, u))
        })
    }

    pub fn triangle_positions(&self, t: usize, positions: &[Vec2]) -> [Vec2; 3] {
        let [a, b, c] = self.triangles[t];
        [positions[a], positions[b], positions[c]]
    }

    /// Number of triangles whose orientation at `positions` differs from the original.
    pub fn count_flips(&self, positions: &[Vec2]) -> usize {
        self.triangles
            .iter()
            .filter(|&&[a, b, c]| {
                let before = signed_area(self.original[a], self.original[b], self.original[c]);
                let after = signed_area(positions[a], positions[b], positions[c]);
                before.signum() != after.signum() || after == 0.0
            })
            .count()
    }

    /// Median edge length at the original positions.
    pub fn median_edge_length(&self) -> f64 {
        let mut lens: Vec<f64> = self
            .edges()
            .map(|(a, b)| (self.original[a] - self.original[b]).norm())
            .collect();
        if lens.is_empty() {
            return 0.0;
        }
        let mid = lens.len() / 2;
        let (_, m, _) = lens.select_nth_unstable_by(mid, f64::total_cmp);
        *m
    }

    /// Line-based text dump: header, node positions (original then current),
    /// and triangle index triples.
    pub fn to_debug_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mdmesh 1");
        let _ = writeln!(s, "nodes {}", self.node_count());
        for (o, c) in self.original.iter().zip(&self.current) {
            let _ = writeln!(s, "{} {} {} {}", o.x, o.y, c.x, c.y);
        }
        let _ = writeln!(s, "triangles {}", self.triangle_count());
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        s
    }

    pub fn from_debug_str(text: &str) -> Result<TriMesh, MeshError> {
        let perr = |m: &str| MeshError::Parse(m.to_owned());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("mdmesh 1") {
            return Err(perr("missing 'mdmesh 1' header"));
        }
        let count = |line: Option<&str>, key: &str| -> Result<usize, MeshError> {
            let line = line.ok_or_else(|| perr("unexpected end of input"))?;
            let mut it = line.split_whitespace();
            if it.next() != Some(key) {
                return Err(perr(&format!("expected '{key}'")));
            }
            it.next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| perr(&format!("bad '{key}' count")))
        };
        let n = count(lines.next(), "nodes")?;
        let mut original = Vec::with_capacity(n);
        let mut current = Vec::with_capacity(n);
        for _ in 0..n {
            let vals: Vec<f64> = lines
                .next()
                .ok_or_else(|| perr("missing node line"))?
                .split_whitespace()
                .map(|v| v.parse().map_err(|_| perr("bad coordinate")))
                .collect::<Result<_, _>>()?;
            if vals.len() != 4 {
                return Err(perr("node line needs 4 numbers"));
            }
            original.push(Vec2::new(vals[0], vals[1]));
            current.push(Vec2::new(vals[2], vals[3]));
        }
        let t = count(lines.next(), "triangles")?;
        let mut triangles = Vec::with_capacity(t);
        for _ in 0..t {
            let ids: Vec<usize> = lines
                .next()
                .ok_or_else(|| perr("missing triangle line"))?
                .split_whitespace()
                .map(|v| v.parse().map_err(|_| perr("bad index")))
                .collect::<Result<_, _>>()?;
            if ids.len() != 3 || ids.iter().any(|&i| i >= n) {
                return Err(perr("triangle line needs 3 valid indices"));
            }
            triangles.push([ids[0], ids[1], ids[2]]);
        }
        let mut mesh = TriMesh::from_triangles(original, triangles);
        mesh.current = current;
        Ok(mesh)
    }
}

/// Triangulate a projected point cloud.
///
/// Near-coincident points are first separated by a deterministic jitter
/// seeded with `seed`; the jittered positions become the mesh's original positions.
pub fn delaunay(points: &PointCloud2D, seed: u64) -> Result<TriMesh, MeshError> {
    let (pts, _) = jitter_duplicates(&points.positions, points.viewport.diagonal(), seed);
    let triangles = delaunay::triangulate(&pts)?;
    Ok(TriMesh::from_triangles(pts, triangles))
}

/// Triangulate raw positions without any jitter. Positions must be pairwise distinct.
pub fn delaunay_exact(points: &[Vec2]) -> Result<TriMesh, MeshError> {
    let triangles = delaunay::triangulate(points)?;
    Ok(TriMesh::from_triangles(points.to_vec(), triangles))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> TriMesh {
        delaunay_exact(&[
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn minimal_triangle() {
        let m = delaunay_exact(&[Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0)]).unwrap();
        assert_eq!(m.triangle_count(), 1);
        assert_eq!(m.edge_count(), 3);
        let [a, b, c] = m.triangle_positions(0, &m.original);
        assert!(signed_area(a, b, c) > 0.0);
    }

    #[test]
    fn unit_square() {
        let m = square();
        assert_eq!(m.triangle_count(), 2);
        assert_eq!(m.edge_count(), 5);
        assert_eq!(m.hull_count(), 4);
    }

    #[test]
    fn collinear_input_is_rejected() {
        let pts: Vec<Vec2> = (0..5).map(|i| Vec2::new(i as f64, 2.0 * i as f64)).collect();
        assert_eq!(delaunay_exact(&pts).unwrap_err(), MeshError::DegenerateInput);
    }

    #[test]
    fn collinear_points_on_hull_edge() {
        let pts = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(3.0, 0.0),
            Vec2::new(1.5, 1.0),
        ];
        let m = delaunay_exact(&pts).unwrap();
        // Three triangles fan from the apex; hull has all 5 points.
        assert_eq!(m.triangle_count(), 3);
        assert_eq!(m.hull_count(), 5);
        assert_eq!(m.triangle_count(), 2 * 5 - 2 - 5);
    }

    #[test]
    fn duplicates_are_jittered() {
        let pts = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 0.0),
        ];
        let cloud = PointCloud2D::from_positions(pts);
        let a = delaunay(&cloud, 7).unwrap();
        let b = delaunay(&cloud, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.node_count(), 5);
        let moved = (a.original[3] - Vec2::new(1.0, 0.0)).norm();
        assert!(moved > 0.0 && moved < 1e-5);
        assert!(matches!(
            delaunay_exact(&cloud.positions),
            Err(MeshError::DuplicatePoint(_))
        ));
    }

    #[test]
    fn limiting_lines_of_right_triangle() {
        let tri = [Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(0.0, 2.0)];
        let lines = limiting_lines(tri).unwrap();
        let l0 = lines[0];
        assert!(l0.signed_distance(Vec2::new(1.0, 0.0)).abs() < 1e-12);
        assert!(l0.signed_distance(Vec2::new(0.0, 1.0)).abs() < 1e-12);
        for (k, l) in lines.iter().enumerate() {
            assert!(l.signed_distance(tri[k]) > 0.0);
        }
    }

    #[test]
    fn limiting_line_is_half_height() {
        let h = 3f64.sqrt() / 2.0;
        let tri = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.5, h)];
        let lines = limiting_lines(tri).unwrap();
        for (k, l) in lines.iter().enumerate() {
            assert!((l.signed_distance(tri[k]) - h / 2.0).abs() < 1e-12);
        }
        assert_eq!(
            limiting_lines([Vec2::ZERO, Vec2::new(1.0, 1.0), Vec2::new(2.0, 2.0)]).unwrap_err(),
            MeshError::ZeroAreaTriangle
        );
    }

    #[test]
    fn debug_dump_round_trip() {
        let mut m = square();
        m.current[2] = Vec2::new(0.9, 1.1);
        let text = m.to_debug_string();
        let back = TriMesh::from_debug_str(&text).unwrap();
        assert_eq!(back, m);
        assert!(TriMesh::from_debug_str("nodes 1").is_err());
    }
}
