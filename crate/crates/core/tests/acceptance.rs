//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any failed.

mod common;

use std::time::{Duration, Instant};

use mdcontour::field::{
    affine_mls, compute_field_in, mean_mls, rigid_mls, MlsParams, MlsVariant, TargetAssignment, TargetMode,
    ViewportTransform,
};
use mdcontour::geom::{Aabb, Vec2};
use mdcontour::layout::{exact_repulsion, layout_run_with, tree_repulsion, KdTree, LayoutParams};
use mdcontour::mesh::{delaunay, delaunay_exact, predicates::incircle, signed_area};
use mdcontour::pipeline::{run_pipeline, DimSelection, PipelineConfig, RenderOptions};
use mdcontour::projection::PointCloud2D;
use mdcontour::render::{line_mask, RenderMode, RenderSpec};
use rand::Rng;

use common::*;

type Outcome = Result<String, String>;

fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(f)
}

fn planarity() -> Outcome {
    let mut checked = 0usize;
    for seed in 0..20u64 {
        let pts = if seed % 2 == 0 {
            uniform_points(300, 1000 + seed)
        } else {
            clustered_points(300, 1000 + seed)
        };
        let mesh = delaunay(&PointCloud2D::from_positions(pts), seed).map_err(|e| e.to_string())?;
        if mesh.node_count() != 300 {
            return Err(format!("seed {seed}: {} nodes", mesh.node_count()));
        }
        for &[a, b, c] in &mesh.triangles {
            if signed_area(mesh.original[a], mesh.original[b], mesh.original[c]) <= 0.0 {
                return Err(format!("seed {seed}: initial triangle not counter-clockwise"));
            }
        }
        let params = LayoutParams::defaults_for(&mesh);
        if params.iterations != 500 {
            return Err(format!("default iterations {}", params.iterations));
        }
        let mut bad: Option<(usize, usize)> = None;
        layout_run_with(mesh, params, |s| {
            let flips = s.mesh.count_flips(s.positions());
            if flips > 0 && bad.is_none() {
                bad = Some((s.iteration, flips));
            }
            checked += s.mesh.triangle_count();
        })
        .map_err(|e| e.to_string())?;
        if let Some((it, flips)) = bad {
            return Err(format!("seed {seed}: {flips} flipped triangles at iteration {it}"));
        }
    }
    Ok(format!("20 seeds x 500 iterations, {checked} triangle checks, 0 flips"))
}

type Mls = fn(Vec2, &[Vec2], &[Vec2], f64) -> Vec2;

const TINY_EPS: f64 = 1e-20;

fn variants() -> [(&'static str, Mls); 3] {
    [
        ("mean", |v, p, q, a| mean_mls(v, p, q, a, TINY_EPS)),
        ("affine", |v, p, q, a| affine_mls(v, p, q, a, TINY_EPS, 1e-9)),
        ("rigid", |v, p, q, a| rigid_mls(v, p, q, a, TINY_EPS)),
    ]
}

fn mls_criteria() -> Outcome {
    let mut r = rng(7);
    let (mut worst_a, mut worst_b) = (0.0f64, 0.0f64);
    for config in 0..50 {
        let n = r.gen_range(3..40);
        let p: Vec<Vec2> = (0..n)
            .map(|_| Vec2::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
            .collect();
        let q: Vec<Vec2> = (0..n)
            .map(|_| Vec2::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)))
            .collect();
        let alpha = r.gen_range(0.5..2.0);
        for (name, f) in variants() {
            for i in 0..n {
                let e = (f(p[i], &p, &q, alpha) - q[i]).norm();
                worst_a = worst_a.max(e);
                if !(e <= 1e-6) {
                    return Err(format!("{name} config {config}: |f(p_{i}) - q_{i}| = {e:e}"));
                }
            }
            for _ in 0..100 {
                let v = Vec2::new(r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5));
                let e = (f(v, &p, &p, alpha) - v).norm();
                worst_b = worst_b.max(e);
                if !(e <= 1e-6) {
                    return Err(format!("{name} config {config}: identity error {e:e} at {v:?}"));
                }
            }
        }
    }
    Ok(format!(
        "3 variants x 50 configs, point identity max {worst_a:.1e}, identity map max {worst_b:.1e}"
    ))
}

fn reproduction() -> Outcome {
    let mut r = rng(11);
    let (mut worst_aff, mut worst_oracle, mut worst_rig) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..4 {
        let p: Vec<Vec2> = (0..5)
            .map(|_| Vec2::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
            .collect();
        let affine = |v: Vec2| Vec2::new(2.0 * v.x + 1.0, v.y);
        let rigid = |v: Vec2| Vec2::new(-v.y + 1.0, v.x + 1.0);
        let qa: Vec<Vec2> = p.iter().map(|&x| affine(x)).collect();
        let qr: Vec<Vec2> = p.iter().map(|&x| rigid(x)).collect();
        for alpha in [1.0, 1.5] {
            for _ in 0..100 {
                let v = Vec2::new(r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5));
                let fa = affine_mls(v, &p, &qa, alpha, TINY_EPS, 1e-9);
                worst_aff = worst_aff.max((fa - affine(v)).norm());
                worst_oracle = worst_oracle.max((fa - affine_oracle(v, &p, &qa, alpha)).norm());
                let fr = rigid_mls(v, &p, &qr, alpha, TINY_EPS);
                worst_rig = worst_rig.max((fr - rigid(v)).norm());
            }
        }
    }
    let detail = format!(
        "affine vs map {worst_aff:.1e}, affine vs weighted-LS oracle {worst_oracle:.1e}, rigid vs motion {worst_rig:.1e}"
    );
    if worst_aff <= 1e-6 && worst_oracle <= 1e-6 && worst_rig <= 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn delaunay_correctness() -> Outcome {
    let mut r = rng(3);
    let mut total_tests = 0usize;
    for instance in 0..100 {
        let n = r.gen_range(3..=50usize);
        let pts: Vec<Vec2> = match instance % 4 {
            // Integer lattice: lots of co-circular quadruples.
            0 => {
                let k = (n as f64).sqrt().ceil().max(2.0) as usize;
                (0..k * k).map(|i| Vec2::new((i % k) as f64, (i / k) as f64)).collect()
            }
            // Points on a circle plus its center.
            1 => {
                let mut v: Vec<Vec2> = (0..n.max(4) - 1)
                    .map(|i| {
                        let a = i as f64 / (n.max(4) - 1) as f64 * std::f64::consts::TAU;
                        Vec2::new(a.cos(), a.sin())
                    })
                    .collect();
                v.push(Vec2::ZERO);
                v
            }
            _ => (0..n.max(3))
                .map(|_| Vec2::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
                .collect(),
        };
        let mesh = delaunay_exact(&pts).map_err(|e| format!("instance {instance}: {e}"))?;
        let nn = pts.len();
        for &[a, b, c] in &mesh.triangles {
            if signed_area(pts[a], pts[b], pts[c]) <= 0.0 {
                return Err(format!("instance {instance}: degenerate or clockwise triangle"));
            }
            for (d, &pd) in pts.iter().enumerate() {
                if d == a || d == b || d == c {
                    continue;
                }
                total_tests += 1;
                if incircle(pts[a], pts[b], pts[c], pd) > 0.0 {
                    return Err(format!("instance {instance}: point {d} inside circumcircle of {a},{b},{c}"));
                }
            }
        }
        let h = hull_size(&pts);
        let (t, e) = (mesh.triangle_count(), mesh.edge_count());
        if t != 2 * nn - 2 - h || e != 3 * nn - 3 - h {
            return Err(format!(
                "instance {instance}: n={nn} h={h} T={t} (want {}) E={e} (want {})",
                2 * nn - 2 - h,
                3 * nn - 3 - h
            ));
        }
    }
    Ok(format!("100 instances, {total_tests} in-circle tests, Euler counts exact"))
}

fn barnes_hut() -> Outcome {
    let pts = uniform_points(1000, 99);
    let mesh = delaunay_exact(&pts).map_err(|e| e.to_string())?;
    let params = LayoutParams::defaults_for(&mesh);
    if params.theta != 0.5 {
        return Err(format!("default theta {}", params.theta));
    }
    let tree = KdTree::build(&pts);
    let (mut err, mut total, mut worst) = (0.0, 0.0, 0.0f64);
    for i in 0..pts.len() {
        let exact = exact_repulsion(i, &pts, &params);
        let approx = tree_repulsion(i, &pts, &tree, &params);
        let e = (approx - exact).norm();
        err += e;
        total += exact.norm();
        worst = worst.max(e / exact.norm());
    }
    let rel = err / total;
    let detail = format!("aggregate relative error {:.3}% (worst single node {:.2}%)", 100.0 * rel, 100.0 * worst);
    if rel < 0.05 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn time_field(n: usize, variant: MlsVariant) -> Duration {
    let pts = uniform_points(n, 500 + n as u64);
    let mut r = rng(n as u64);
    let q: Vec<Vec2> = pts
        .iter()
        .map(|&p| p + Vec2::new(r.gen_range(-0.05..0.05), r.gen_range(-0.05..0.05)))
        .collect();
    let mesh = delaunay_exact(&pts).unwrap();
    let vt = ViewportTransform::fit(
        Aabb {
            min: Vec2::ZERO,
            max: Vec2::new(1.0, 1.0),
        }
        .expanded(0.05),
        600,
        600,
    );
    let targets = TargetAssignment::custom(q, TargetMode::Projection);
    let params = MlsParams::new(variant);
    (0..2)
        .map(|_| {
            let t = Instant::now();
            let f = compute_field_in(vt, Some(&mesh), &pts, &targets, &params).unwrap();
            let d = t.elapsed();
            assert!(f.is_finite());
            d
        })
        .min()
        .unwrap()
}

fn field_scaling() -> Outcome {
    single_thread(|| {
        let times: Vec<(usize, Duration)> = [250, 500, 1000, 2000]
            .into_iter()
            .map(|n| (n, time_field(n, MlsVariant::Mean)))
            .collect();
        let mut ok = true;
        let mut parts = Vec::new();
        for w in times.windows(2) {
            let ratio = w[1].1.as_secs_f64() / w[0].1.as_secs_f64();
            ok &= (1.5..=2.8).contains(&ratio);
            parts.push(format!("t({})/t({})={ratio:.2}", w[1].0, w[0].0));
        }
        let linear = time_field(1000, MlsVariant::Linear);
        let speedup = times[2].1.as_secs_f64() / linear.as_secs_f64();
        ok &= speedup >= 5.0;
        let detail = format!(
            "{}; linear {speedup:.0}x faster than mean at n=1000 ({:.0} ms vs {:.0} ms)",
            parts.join(", "),
            linear.as_secs_f64() * 1e3,
            times[2].1.as_secs_f64() * 1e3
        );
        if ok {
            Ok(detail)
        } else {
            Err(detail)
        }
    })
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let csv = dir.path().join("cars.csv");
    std::fs::write(&csv, synthetic_cars_csv(300, 2024)).map_err(|e| e.to_string())?;
    let config = |run: &str| {
        let mut cfg = PipelineConfig::new(&csv);
        cfg.dims = DimSelection::All;
        cfg.render = RenderOptions {
            variant: MlsVariant::Mean,
            ..RenderOptions::default()
        };
        cfg.seed = 17;
        cfg.output = dir.path().join(run).join("{dim}.png").to_string_lossy().into_owned();
        cfg
    };
    let (first, elapsed) = single_thread(|| {
        let t = Instant::now();
        let out = run_pipeline(&config("a"));
        (out, t.elapsed())
    });
    let first = first.map_err(|e| e.to_string())?;
    let second = run_pipeline(&config("b")).map_err(|e| e.to_string())?;
    if first.len() != 7 || second.len() != 7 {
        return Err(format!("expected 7 images, got {} and {}", first.len(), second.len()));
    }
    for (a, b) in first.iter().zip(&second) {
        if std::fs::read(a).unwrap() != std::fs::read(b).unwrap() {
            return Err(format!("{} differs between runs", a.display()));
        }
    }
    let detail = format!(
        "7 PNGs byte-identical across runs; single-threaded 7-dimension run took {:.1} s",
        elapsed.as_secs_f64()
    );
    if elapsed < Duration::from_secs(60) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn one_dim(values: Vec<f64>) -> TargetAssignment {
    TargetAssignment::custom(
        values.into_iter().map(|v| Vec2::new(v, 0.0)).collect(),
        TargetMode::Dimension {
            index: 0,
            name: "value".into(),
        },
    )
}

fn patterns() -> Outcome {
    let size = 600;
    let vt = ViewportTransform::fit(
        Aabb {
            min: Vec2::ZERO,
            max: Vec2::new(1.0, 1.0),
        },
        size,
        size,
    );
    let step = 1.0 / 6.0;
    let grid: Vec<Vec2> = (0..36)
        .map(|i| Vec2::new(step * ((i % 6) as f64 + 0.5), step * ((i / 6) as f64 + 0.5)))
        .collect();
    let spec = RenderSpec::new(RenderMode::Contour, 1.0);
    let mean = MlsParams::new(MlsVariant::Mean);

    // Peak: one outlier among flat neighbors.
    let mut p = grid.clone();
    let mut vals = vec![0.0; p.len()];
    p.push(Vec2::new(0.5, 0.5));
    vals.push(10.0);
    let field = compute_field_in(vt, None, &p, &one_dim(vals), &mean).map_err(|e| e.to_string())?;
    let mask = line_mask(&field, &spec);
    let (cx, cy) = vt.to_pixel(Vec2::new(0.5, 0.5));
    let center = cy as usize * size + cx as usize;
    let rings = enclosing_rings(&mask, size, size, center);

    // Plateau: a dense constant cluster inside a sloped field.
    let mut p: Vec<Vec2> = grid.iter().copied().filter(|g| (*g - Vec2::new(0.5, 0.5)).norm() > 0.16).collect();
    let mut vals: Vec<f64> = p.iter().map(|g| 10.0 * g.x).collect();
    let mut r = rng(5);
    for _ in 0..40 {
        let a = r.gen_range(0.0..std::f64::consts::TAU);
        let d = 0.12 * r.gen_range(0.0f64..1.0).sqrt();
        p.push(Vec2::new(0.5 + d * a.cos(), 0.5 + d * a.sin()));
        vals.push(5.5);
    }
    let field = compute_field_in(vt, None, &p, &one_dim(vals), &mean).map_err(|e| e.to_string())?;
    let mask = line_mask(&field, &spec);
    let total_lines = mask.iter().filter(|&&m| m).count();
    let open: Vec<bool> = mask.iter().map(|&m| !m).collect();
    let (labels, _) = components(&open, size, size);
    let plateau_label = labels[center];
    let radius_px = 0.08 / vt.scale;
    let mut disk = 0;
    let mut disk_clear = true;
    for y in 0..size {
        for x in 0..size {
            let d = ((x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2)).sqrt();
            if d <= radius_px {
                disk += 1;
                disk_clear &= labels[y * size + x] == plateau_label && plateau_label != 0;
            }
        }
    }

    let detail = format!(
        "peak: {rings} closed rings around the outlier; plateau: {disk}-pixel disk in one line-free component ({total_lines} line pixels elsewhere)"
    );
    if rings >= 3 && disk_clear && total_lines > 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("planarity preserved through layout", planarity),
        ("MLS point identity and identity reproduction", mls_criteria),
        ("affine and rigid reproduction", reproduction),
        ("Delaunay empty circumcircle and Euler counts", delaunay_correctness),
        ("Barnes-Hut force fidelity (n=1000, theta=0.5)", barnes_hut),
        ("field evaluation scaling", field_scaling),
        ("end-to-end determinism and 7-dimension runtime", determinism),
        ("peak rings and plateau region", patterns),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
