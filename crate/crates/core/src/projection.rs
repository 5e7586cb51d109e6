//! Principal component projection onto the plane.

use serde::Serialize;
use thiserror::Error;

use crate::dataset::Dataset;
use crate::geom::{Aabb, Vec2};

/// Fractional margin added around the projected points.
pub const VIEWPORT_MARGIN: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum ProjectionError {
    #[error("every column is constant; nothing to project")]
    VarianceZero,
}

/// Mean and the two leading principal axes of a dataset.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionModel {
    pub mean: Vec<f64>,
    pub axes: [Vec<f64>; 2],
    pub eigenvalues: [f64; 2],
}

impl ProjectionModel {
    pub fn project(&self, row: &[f64]) -> Vec2 {
        let dot = |axis: &[f64]| {
            row.iter()
                .zip(&self.mean)
                .zip(axis)
                .map(|((x, m), a)| (x - m) * a)
                .sum::<f64>()
        };
        Vec2::new(dot(&self.axes[0]), dot(&self.axes[1]))
    }
}

#[derive(Debug, Clone)]
pub struct PointCloud2D {
    pub positions: Vec<Vec2>,
    pub viewport: Aabb,
}

impl PointCloud2D {
    /// Wrap raw positions, deriving the viewport from their bounds.
    pub fn from_positions(positions: Vec<Vec2>) -> PointCloud2D {
        let viewport = Aabb::of_points(&positions)
            .map(|b| b.expanded(VIEWPORT_MARGIN))
            .unwrap_or(Aabb {
                min: Vec2::ZERO,
                max: Vec2::new(1.0, 1.0),
            });
        PointCloud2D {
            positions,
            viewport,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Sample covariance (n - 1 denominator) of the dataset columns, row-major d x d.
pub fn covariance(ds: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let d = ds.dims();
    let n = ds.row_count();
    let mean: Vec<f64> = ds
        .columns()
        .iter()
        .map(|c| c.values.iter().sum::<f64>() / n as f64)
        .collect();
    let mut cov = vec![0.0; d * d];
    for a in 0..d {
        let ca = &ds.column(a).values;
        for b in a..d {
            let cb = &ds.column(b).values;
            let s: f64 = ca
                .iter()
                .zip(cb)
                .map(|(x, y)| (x - mean[a]) * (y - mean[b]))
                .sum();
            let v = s / (n as f64 - 1.0);
            cov[a * d + b] = v;
            cov[b * d + a] = v;
        }
    }
    (mean, cov)
}

/// Cyclic Jacobi eigen-decomposition of a symmetric row-major `d x d` matrix.
///
/// Returns eigenvalues and the matching unit eigenvectors, sorted by
/// descending eigenvalue.
pub fn symmetric_eigen(matrix: &[f64], d: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    assert_eq!(matrix.len(), d * d);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * d + j] * a[i * d + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[p * d + p];
                let aqq = a[q * d + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[j * d + j].total_cmp(&a[i * d + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * d + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..d).map(|k| v[k * d + i]).collect())
        .collect();
    (values, vectors)
}

/// Flip so the largest-magnitude component is positive.
fn canonical_sign(mut axis: Vec<f64>) -> Vec<f64> {
    let pivot = axis
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
        .map(|(_, x)| x)
        .unwrap_or(1.0);
    if pivot < 0.0 {
        axis.iter_mut().for_each(|x| *x = -*x);
    }
    axis
}

/// Project every row onto the two leading principal axes.
pub fn pca_project(ds: &Dataset) -> Result<(ProjectionModel, PointCloud2D), ProjectionError> {
    let d = ds.dims();
    let (mean, cov) = covariance(ds);
    let trace: f64 = (0..d).map(|i| cov[i * d + i]).sum();
    if trace <= 1e-300 {
        return Err(ProjectionError::VarianceZero);
    }
    let (values, vectors) = symmetric_eigen(&cov, d);
    let ev0 = values[0].max(0.0);
    if ev0 <= 1e-14 * trace {
        return Err(ProjectionError::VarianceZero);
    }
    let ev1 = values.get(1).copied().unwrap_or(0.0).max(0.0);

    let mut vectors = vectors.into_iter();
    let axis0 = canonical_sign(vectors.next().expect("d >= 1"));
    let axis1 = match vectors.next() {
        Some(a) => canonical_sign(a),
        // One column only: the second axis carries nothing.
        None => vec![0.0; d],
    };

    let model = ProjectionModel {
        mean,
        axes: [axis0, axis1],
        eigenvalues: [ev0, ev1],
    };
    let positions = (0..ds.row_count())
        .map(|i| model.project(&ds.row(i)))
        .collect();
    Ok((model, PointCloud2D::from_positions(positions)))
}
