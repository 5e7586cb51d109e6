//! Incremental Bowyer–Watson triangulation with ghost triangles.
//!
//! Every hull edge `a -> b` of the real triangulation carries a ghost
//! triangle `(b, a, GHOST)`. A point conflicts with a ghost when it lies
//! strictly outside that hull edge, or on the open edge segment. With this
//! rule the conflict region is always connected and star-shaped, so hull
//! growth needs no special casing and the result is exactly the convex-hull
//! Delaunay triangulation.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::predicates::{incircle, orient2d};
use super::MeshError;
use crate::geom::{Aabb, Vec2};

const GHOST: u32 = u32::MAX;
const NONE: u32 = u32::MAX;

/// Points closer than this fraction of the viewport diagonal count as duplicates.
pub const DUPLICATE_TOLERANCE: f64 = 1e-9;
/// Jitter radius, as a fraction of the viewport diagonal.
pub const JITTER_RADIUS: f64 = 1e-6;

/// Nudge every point that (nearly) coincides with an earlier one.
///
/// Perturbations are drawn from a ChaCha stream seeded with `seed`, in index
/// order, so the output is a pure function of `(points, diagonal, seed)`.
pub fn jitter_duplicates(points: &[Vec2], diagonal: f64, seed: u64) -> (Vec<Vec2>, usize) {
    let diagonal = if diagonal > 0.0 && diagonal.is_finite() {
        diagonal
    } else {
        1.0
    };
    let tol = DUPLICATE_TOLERANCE * diagonal;
    let radius = JITTER_RADIUS * diagonal;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell = |p: Vec2| ((p.x / tol).floor() as i64, (p.y / tol).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut out: Vec<Vec2> = Vec::with_capacity(points.len());
    let mut moved = 0;

    for &p0 in points {
        let mut p = p0;
        let mut attempts = 0;
        loop {
            let (cx, cy) = cell(p);
            let clash = (-1..=1).any(|dx| {
                (-1..=1).any(|dy| {
                    grid.get(&(cx + dx, cy + dy)).is_some_and(|ids| {
                        ids.iter().any(|&j| (out[j] - p).norm_sq() < tol * tol)
                    })
                })
            });
            if !clash {
                break;
            }
            attempts += 1;
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = radius * attempts as f64 * rng.gen_range(0.5..1.0);
            p = p0 + Vec2::new(angle.cos(), angle.sin()) * r;
        }
        if attempts > 0 {
            moved += 1;
        }
        grid.entry(cell(p)).or_default().push(out.len());
        out.push(p);
    }
    (out, moved)
}

/// Morton-order insertion sequence; keeps point-location walks short.
fn insertion_order(points: &[Vec2]) -> Vec<usize> {
    let Some(b) = Aabb::of_points(points) else {
        return Vec::new();
    };
    let w = b.width().max(f64::MIN_POSITIVE);
    let h = b.height().max(f64::MIN_POSITIVE);
    let spread = |mut v: u64| {
        v &= 0xffff_ffff;
        v = (v | (v << 16)) & 0x0000_ffff_0000_ffff;
        v = (v | (v << 8)) & 0x00ff_00ff_00ff_00ff;
        v = (v | (v << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
        v = (v | (v << 2)) & 0x3333_3333_3333_3333;
        v = (v | (v << 1)) & 0x5555_5555_5555_5555;
        v
    };
    let key = |p: Vec2| {
        let qx = (((p.x - b.min.x) / w) * 65535.0) as u64;
        let qy = (((p.y - b.min.y) / h) * 65535.0) as u64;
        spread(qx) | (spread(qy) << 1)
    };
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by_key(|&i| (key(points[i]), i));
    idx
}

struct Builder<'a> {
    pts: &'a [Vec2],
    tris: Vec<[u32; 3]>,
    adj: Vec<[u32; 3]>,
    alive: Vec<bool>,
    free: Vec<u32>,
    hint: u32,
    // Per-triangle visit stamps for cavity search.
    stamp: Vec<u32>,
    round: u32,
}

impl<'a> Builder<'a> {
    fn new(pts: &'a [Vec2]) -> Self {
        Builder {
            pts,
            tris: Vec::new(),
            adj: Vec::new(),
            alive: Vec::new(),
            free: Vec::new(),
            hint: 0,
            stamp: Vec::new(),
            round: 0,
        }
    }

    #[inline]
    fn pt(&self, i: u32) -> Vec2 {
        self.pts[i as usize]
    }

    fn is_ghost(&self, t: u32) -> bool {
        self.tris[t as usize].contains(&GHOST)
    }

    fn alloc(&mut self, tri: [u32; 3]) -> u32 {
        if let Some(t) = self.free.pop() {
            self.tris[t as usize] = tri;
            self.adj[t as usize] = [NONE; 3];
            self.alive[t as usize] = true;
            t
        } else {
            self.tris.push(tri);
            self.adj.push([NONE; 3]);
            self.alive.push(true);
            self.stamp.push(0);
            (self.tris.len() - 1) as u32
        }
    }

    fn kill(&mut self, t: u32) {
        self.alive[t as usize] = false;
        self.free.push(t);
    }

    fn conflicts(&self, t: u32, p: Vec2) -> bool {
        let [a, b, c] = self.tris[t as usize];
        if a != GHOST && b != GHOST && c != GHOST {
            return incircle(self.pt(a), self.pt(b), self.pt(c), p) > 0.0;
        }
        let (u, v) = if c == GHOST {
            (a, b)
        } else if a == GHOST {
            (b, c)
        } else {
            (c, a)
        };
        let (u, v) = (self.pt(u), self.pt(v));
        let o = orient2d(u, v, p);
        if o > 0.0 {
            return true;
        }
        o == 0.0 && (p - u).dot(v - u) > 0.0 && (p - v).dot(u - v) > 0.0
    }

    fn seed(&mut self, a: u32, b: u32, c: u32) {
        let (a, b, c) = if orient2d(self.pt(a), self.pt(b), self.pt(c)) > 0.0 {
            (a, b, c)
        } else {
            (a, c, b)
        };
        let tris = [[a, b, c], [b, a, GHOST], [c, b, GHOST], [a, c, GHOST]];
        let ids: Vec<u32> = tris.iter().map(|&t| self.alloc(t)).collect();
        let mut edges: HashMap<(u32, u32), (u32, usize)> = HashMap::new();
        for &t in &ids {
            for k in 0..3 {
                let tri = self.tris[t as usize];
                edges.insert((tri[(k + 1) % 3], tri[(k + 2) % 3]), (t, k));
            }
        }
        for &t in &ids {
            for k in 0..3 {
                let tri = self.tris[t as usize];
                let (x, y) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let (n, _) = edges[&(y, x)];
                self.adj[t as usize][k] = n;
            }
        }
        self.hint = ids[0];
    }

    /// Visibility walk from the hint to a triangle in conflict with `p`.
    fn locate(&self, p: Vec2) -> Option<u32> {
        let mut t = self.hint;
        if !self.alive[t as usize] || self.is_ghost(t) {
            t = (0..self.tris.len() as u32).find(|&i| self.alive[i as usize] && !self.is_ghost(i))?;
        }
        let cap = 4 * self.tris.len() + 16;
        for step in 0..cap {
            if self.is_ghost(t) {
                return Some(t);
            }
            let tri = self.tris[t as usize];
            let mut moved = false;
            for r in 0..3 {
                let k = (r + step) % 3;
                let (x, y) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                if orient2d(self.pt(x), self.pt(y), p) < 0.0 {
                    t = self.adj[t as usize][k];
                    moved = true;
                    break;
                }
            }
            if !moved {
                return Some(t);
            }
        }
        None
    }

    fn insert(&mut self, pi: u32) -> Result<(), MeshError> {
        let p = self.pt(pi);
        let start = match self.locate(p) {
            Some(t) if self.conflicts(t, p) => t,
            _ => (0..self.tris.len() as u32)
                .find(|&t| self.alive[t as usize] && self.conflicts(t, p))
                .ok_or(MeshError::DuplicatePoint(pi as usize))?,
        };

        self.round += 1;
        let round = self.round;
        let mut cavity = vec![start];
        self.stamp[start as usize] = round;
        // (x, y, outside triangle) for every cavity boundary edge.
        let mut boundary: Vec<(u32, u32, u32)> = Vec::new();
        let mut i = 0;
        while i < cavity.len() {
            let t = cavity[i];
            i += 1;
            let tri = self.tris[t as usize];
            for k in 0..3 {
                let n = self.adj[t as usize][k];
                if self.stamp[n as usize] == round {
                    continue;
                }
                if self.conflicts(n, p) {
                    self.stamp[n as usize] = round;
                    cavity.push(n);
                } else {
                    boundary.push((tri[(k + 1) % 3], tri[(k + 2) % 3], n));
                }
            }
        }

        for &t in &cavity {
            self.kill(t);
        }
        let mut new_ids = Vec::with_capacity(boundary.len());
        for &(x, y, out) in &boundary {
            let t = self.alloc([x, y, pi]);
            self.adj[t as usize][2] = out;
            let otri = self.tris[out as usize];
            let j = (0..3)
                .find(|&j| otri[j] != x && otri[j] != y)
                .expect("outside triangle shares the boundary edge");
            self.adj[out as usize][j] = t;
            new_ids.push((x, y, t));
        }
        for &(x, y, t) in &new_ids {
            let after = new_ids.iter().find(|e| e.0 == y).map(|e| e.2);
            let before = new_ids.iter().find(|e| e.1 == x).map(|e| e.2);
            match (after, before) {
                (Some(a), Some(b)) => {
                    self.adj[t as usize][0] = a;
                    self.adj[t as usize][1] = b;
                }
                _ => return Err(MeshError::Internal("cavity boundary is not a cycle")),
            }
        }
        if let Some(&(_, _, t)) = new_ids.iter().find(|&&(x, y, _)| x != GHOST && y != GHOST) {
            self.hint = t;
        }
        Ok(())
    }

    fn finish(self) -> Vec<[usize; 3]> {
        self.tris
            .iter()
            .zip(&self.alive)
            .filter(|(t, &alive)| alive && !t.contains(&GHOST))
            .map(|(t, _)| [t[0] as usize, t[1] as usize, t[2] as usize])
            .collect()
    }
}

/// Delaunay triangles (counter-clockwise index triples) of pairwise-distinct points.
pub fn triangulate(points: &[Vec2]) -> Result<Vec<[usize; 3]>, MeshError> {
    if points.len() < 3 {
        return Err(MeshError::TooFewPoints(points.len()));
    }
    if points.len() >= GHOST as usize {
        return Err(MeshError::TooManyPoints(points.len()));
    }
    let order = insertion_order(points);
    let a = order[0];
    let b = order[1];
    let c = order[2..]
        .iter()
        .copied()
        .find(|&c| orient2d(points[a], points[b], points[c]) != 0.0)
        .ok_or(MeshError::DegenerateInput)?;

    let mut builder = Builder::new(points);
    builder.seed(a as u32, b as u32, c as u32);
    for &i in order[2..].iter().filter(|&&i| i != c) {
        builder.insert(i as u32)?;
    }
    Ok(builder.finish())
}
