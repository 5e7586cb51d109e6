#![allow(dead_code)]

use std::collections::VecDeque;
use std::fmt::Write as _;

use mdcontour::geom::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_points(n: usize, seed: u64) -> Vec<Vec2> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| Vec2::new(r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)))
        .collect()
}

fn gaussian(r: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = r.gen_range(f64::EPSILON..1.0);
    let u2: f64 = r.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// A few Gaussian blobs of different spreads.
pub fn clustered_points(n: usize, seed: u64) -> Vec<Vec2> {
    let mut r = rng(seed);
    let centers: Vec<(Vec2, f64)> = (0..4)
        .map(|_| {
            (
                Vec2::new(r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)),
                r.gen_range(0.03..0.2),
            )
        })
        .collect();
    (0..n)
        .map(|i| {
            let (c, s) = centers[i % centers.len()];
            c + Vec2::new(gaussian(&mut r), gaussian(&mut r)) * s
        })
        .collect()
}

/// Car-like table: seven correlated numeric columns.
pub fn synthetic_cars_csv(rows: usize, seed: u64) -> String {
    let mut r = rng(seed);
    let mut s = String::from("mpg,cylinders,displacement,horsepower,weight,acceleration,year\n");
    for _ in 0..rows {
        let size: f64 = r.gen_range(0.0..1.0);
        let cyl = [4.0, 4.0, 6.0, 8.0][((size * 3.999) as usize).min(3)];
        let disp = 70.0 + 380.0 * size + 15.0 * gaussian(&mut r);
        let hp = 45.0 + 180.0 * size + 12.0 * gaussian(&mut r);
        let weight = 1600.0 + 3300.0 * size + 200.0 * gaussian(&mut r);
        let year = (70.0 + r.gen_range(0.0..13.0_f64)).floor();
        let accel = 20.0 - 8.0 * size + 1.5 * gaussian(&mut r);
        let mpg = (46.0 - 30.0 * size + 0.6 * (year - 70.0) + 2.5 * gaussian(&mut r)).max(9.0);
        let _ = writeln!(s, "{mpg:.1},{cyl},{disp:.1},{hp:.0},{weight:.0},{accel:.1},{year}");
    }
    s
}

/// Hull vertex count, collinear boundary points included.
pub fn hull_size(points: &[Vec2]) -> usize {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let orient = |a: Vec2, b: Vec2, c: Vec2| {
        robust::orient2d(
            robust::Coord { x: a.x, y: a.y },
            robust::Coord { x: b.x, y: b.y },
            robust::Coord { x: c.x, y: c.y },
        )
    };
    let chain = |iter: &mut dyn Iterator<Item = Vec2>| {
        let mut h: Vec<Vec2> = Vec::new();
        for p in iter {
            // Pop only on strict right turns so collinear points stay.
            while h.len() >= 2 && orient(h[h.len() - 2], h[h.len() - 1], p) < 0.0 {
                h.pop();
            }
            h.push(p);
        }
        h
    };
    let lower = chain(&mut pts.iter().copied());
    let upper = chain(&mut pts.iter().rev().copied());
    lower.len() + upper.len() - 2
}

/// Weighted least-squares affine fit in homogeneous form, `[x y 1] B ≈ q`,
/// solved by Gaussian elimination.
pub fn affine_oracle(v: Vec2, p: &[Vec2], q: &[Vec2], alpha: f64) -> Vec2 {
    let mut a = [[0.0f64; 3]; 3];
    let mut b = [[0.0f64; 2]; 3];
    for (pi, qi) in p.iter().zip(q) {
        let w = 1.0 / (*pi - v).norm_sq().powf(alpha);
        let row = [pi.x, pi.y, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += w * row[i] * row[j];
            }
            b[i][0] += w * row[i] * qi.x;
            b[i][1] += w * row[i] * qi.y;
        }
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in 0..3 {
                    a[r][c] -= f * a[col][c];
                }
                b[r][0] -= f * b[col][0];
                b[r][1] -= f * b[col][1];
            }
        }
    }
    let coef: Vec<[f64; 2]> = (0..3).map(|i| [b[i][0] / a[i][i], b[i][1] / a[i][i]]).collect();
    Vec2::new(
        v.x * coef[0][0] + v.y * coef[1][0] + coef[2][0],
        v.x * coef[0][1] + v.y * coef[1][1] + coef[2][1],
    )
}

/// 8-connected components of `mask`; returns a label per pixel (0 = background) and the count.
pub fn components(mask: &[bool], w: usize, h: usize) -> (Vec<u32>, u32) {
    let mut labels = vec![0u32; w * h];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !mask[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if mask[j] && labels[j] == 0 {
                        labels[j] = next;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    (labels, next)
}

/// Pixels reachable from the image border through pixels where `open` holds, 4-connected.
pub fn reachable_from_border(open: &[bool], w: usize, h: usize) -> Vec<bool> {
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::new();
    for i in 0..w * h {
        let (x, y) = (i % w, i / w);
        if (x == 0 || y == 0 || x + 1 == w || y + 1 == h) && open[i] {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = (i % w, i / w);
        let mut visit = |j: usize| {
            if open[j] && !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        };
        if x > 0 {
            visit(i - 1);
        }
        if x + 1 < w {
            visit(i + 1);
        }
        if y > 0 {
            visit(i - w);
        }
        if y + 1 < h {
            visit(i + w);
        }
    }
    seen
}

/// Number of distinct line components that cut pixel `center` off from the border.
pub fn enclosing_rings(mask: &[bool], w: usize, h: usize, center: usize) -> usize {
    let (labels, n) = components(mask, w, h);
    (1..=n)
        .filter(|&l| {
            let open: Vec<bool> = labels.iter().map(|&x| x != l).collect();
            !reachable_from_border(&open, w, h)[center]
        })
        .count()
}
