//! Synthetic inputs shared by the benchmarks.

use mdcontour::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Node counts matching small, medium and large tables.
pub const SIZES: [usize; 3] = [306, 1000, 2245];

/// `n` points in three Gaussian-ish clumps, like a PCA projection of clustered data.
pub fn projected_points(n: usize, seed: u64) -> Vec<Vec2> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let centers = [Vec2::new(-1.5, 0.2), Vec2::new(0.8, 1.1), Vec2::new(1.2, -0.9)];
    (0..n)
        .map(|i| {
            let c = centers[i % centers.len()];
            let s: f64 = r.gen_range(0.0..1.0);
            let a: f64 = r.gen_range(0.0..std::f64::consts::TAU);
            c + Vec2::new(a.cos(), a.sin()) * (0.6 * s * s)
        })
        .collect()
}
