//! Moving least squares deformations evaluated at a single point.
//!
//! Every function maps a point `v` in the space of the moved control points
//! `p` to the space of their targets `q`. All of them reproduce `q_i`
//! exactly at `p_i` (via the [`Weight::AtControlPoint`] short-circuit) and
//! the identity when `p == q`.

use crate::geom::{Mat2, Vec2};

/// Inverse-distance weight of one control point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Finite(f64),
    /// `v` sits on the control point; the weight is unbounded.
    AtControlPoint,
}

/// `1 / |p_i - v|^(2 alpha)`, or [`Weight::AtControlPoint`] when the squared
/// distance falls below `epsilon_dist`.
pub fn mls_weight(v: Vec2, pi: Vec2, alpha: f64, epsilon_dist: f64) -> Weight {
    let d2 = (pi - v).norm_sq();
    if d2 < epsilon_dist || d2 == 0.0 {
        Weight::AtControlPoint
    } else {
        Weight::Finite(weight_of_sq(d2, alpha))
    }
}

/// `d2^(-alpha)` with exact fast paths for the common exponents.
#[inline]
pub(crate) fn weight_of_sq(d2: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        1.0 / d2
    } else if alpha == 0.5 {
        1.0 / d2.sqrt()
    } else if alpha == 1.5 {
        1.0 / (d2 * d2.sqrt())
    } else if alpha == 2.0 {
        1.0 / (d2 * d2)
    } else {
        d2.powf(-alpha)
    }
}

/// Fill `weights` for `v`; returns the nearest control within the snap radius, if any.
#[inline]
pub(crate) fn fill_weights(
    v: Vec2,
    p: &[Vec2],
    alpha: f64,
    epsilon_dist: f64,
    weights: &mut Vec<f64>,
) -> Option<usize> {
    weights.clear();
    let mut snap: Option<(usize, f64)> = None;
    for (i, &pi) in p.iter().enumerate() {
        let d2 = (pi - v).norm_sq();
        if d2 < epsilon_dist || d2 == 0.0 {
            if snap.map_or(true, |(_, best)| d2 < best) {
                snap = Some((i, d2));
            }
            weights.push(0.0);
        } else {
            weights.push(weight_of_sq(d2, alpha));
        }
    }
    snap.map(|(i, _)| i)
}

/// Inside the snap radius the control's own displacement is carried over,
/// which is exact at `p_i` and for identity controls.
#[inline]
fn snapped(v: Vec2, pi: Vec2, qi: Vec2) -> Vec2 {
    qi + (v - pi)
}

/// Weighted centroids `(p*, q*)` and the weight sum.
#[inline]
fn centroids(w: &[f64], p: &[Vec2], q: &[Vec2]) -> (Vec2, Vec2, f64) {
    let mut sw = 0.0;
    let mut sp = Vec2::ZERO;
    let mut sq = Vec2::ZERO;
    for ((&wi, &pi), &qi) in w.iter().zip(p).zip(q) {
        sw += wi;
        sp += pi * wi;
        sq += qi * wi;
    }
    (sp / sw, sq / sw, sw)
}

/// `v` plus the weighted mean of the control displacements `q_i - p_i`.
pub fn mean_mls(v: Vec2, p: &[Vec2], q: &[Vec2], alpha: f64, epsilon_dist: f64) -> Vec2 {
    mean_with(v, p, q, alpha, epsilon_dist)
}

pub(crate) fn mean_with(
    v: Vec2,
    p: &[Vec2],
    q: &[Vec2],
    alpha: f64,
    epsilon_dist: f64,
) -> Vec2 {
    let mut sw = 0.0;
    let mut sd = Vec2::ZERO;
    let mut snap: Option<(usize, f64)> = None;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        let d2 = (pi - v).norm_sq();
        if d2 < epsilon_dist || d2 == 0.0 {
            if snap.map_or(true, |(_, best)| d2 < best) {
                snap = Some((i, d2));
            }
            continue;
        }
        let w = weight_of_sq(d2, alpha);
        sw += w;
        sd += (qi - pi) * w;
    }
    if let Some((i, _)) = snap {
        return snapped(v, p[i], q[i]);
    }
    v + sd / sw
}

/// Best weighted affine map of the centered controls, applied to `v`.
///
/// `reg_eps` is relative to the trace of the weighted moment matrix and is
/// only added when that matrix is numerically singular.
pub fn affine_mls(
    v: Vec2,
    p: &[Vec2],
    q: &[Vec2],
    alpha: f64,
    epsilon_dist: f64,
    reg_eps: f64,
) -> Vec2 {
    let mut w = Vec::with_capacity(p.len());
    affine_with(v, p, q, alpha, epsilon_dist, reg_eps, &mut w)
}

pub(crate) fn affine_with(
    v: Vec2,
    p: &[Vec2],
    q: &[Vec2],
    alpha: f64,
    epsilon_dist: f64,
    reg_eps: f64,
    w: &mut Vec<f64>,
) -> Vec2 {
    if let Some(i) = fill_weights(v, p, alpha, epsilon_dist, w) {
        return snapped(v, p[i], q[i]);
    }
    let (p_star, q_star, _) = centroids(w, p, q);
    let mut mpp = Mat2::ZERO;
    let mut mpq = Mat2::ZERO;
    let mut raw = 0.0;
    for ((&wi, &pi), &qi) in w.iter().zip(p).zip(q) {
        let ph = pi - p_star;
        let qh = qi - q_star;
        mpp += Mat2::outer(ph, ph) * wi;
        mpq += Mat2::outer(ph, qh) * wi;
        raw += wi * pi.norm_sq();
    }
    let tr = mpp.trace();
    // Spread lost in rounding noise: every control at one spot.
    if !(tr > 1e-24 * raw) {
        return v - p_star + q_star;
    }
    if mpp.det() <= 1e-9 * tr * tr {
        let r = reg_eps * tr;
        mpp.m[0][0] += r;
        mpp.m[1][1] += r;
    }
    match mpp.inverse() {
        Some(inv) => inv.mul_mat(&mpq).left_mul(v - p_star) + q_star,
        None => v - p_star + q_star,
    }
}

/// The rotation direction of the rigid fit could not be determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegenerateRotation;

/// Best weighted rotation plus translation, applied to `v`.
pub fn rigid_mls_raw(
    v: Vec2,
    p: &[Vec2],
    q: &[Vec2],
    alpha: f64,
    epsilon_dist: f64,
) -> Result<Vec2, DegenerateRotation> {
    let mut w = Vec::with_capacity(p.len());
    rigid_with(v, p, q, alpha, epsilon_dist, &mut w)
}

/// [`rigid_mls_raw`], falling back to [`mean_mls`] where the rotation is undefined.
pub fn rigid_mls(v: Vec2, p: &[Vec2], q: &[Vec2], alpha: f64, epsilon_dist: f64) -> Vec2 {
    rigid_mls_raw(v, p, q, alpha, epsilon_dist)
        .unwrap_or_else(|_| mean_mls(v, p, q, alpha, epsilon_dist))
}

pub(crate) fn rigid_with(
    v: Vec2,
    p: &[Vec2],
    q: &[Vec2],
    alpha: f64,
    epsilon_dist: f64,
    w: &mut Vec<f64>,
) -> Result<Vec2, DegenerateRotation> {
    if let Some(i) = fill_weights(v, p, alpha, epsilon_dist, w) {
        return Ok(snapped(v, p[i], q[i]));
    }
    let (p_star, q_star, _) = centroids(w, p, q);
    let vh = v - p_star;
    let vlen = vh.norm();
    if vlen == 0.0 {
        return Ok(q_star);
    }
    // q̂ (p̂; -p̂⊥) (v̂; -v̂⊥)^T collapses to (a v̂x + b v̂y, a v̂y - b v̂x)
    // with a = q̂·p̂ and b = q̂ × p̂.
    let mut sa = 0.0;
    let mut sb = 0.0;
    let mut scale = 0.0;
    for ((&wi, &pi), &qi) in w.iter().zip(p).zip(q) {
        let ph = pi - p_star;
        let qh = qi - q_star;
        sa += wi * qh.dot(ph);
        sb += wi * qh.cross(ph);
        scale += wi * qh.norm() * ph.norm();
    }
    let f = Vec2::new(sa * vh.x + sb * vh.y, sa * vh.y - sb * vh.x);
    let flen = f.norm();
    if !(flen > 1e-12 * scale * vlen) {
        return Err(DegenerateRotation);
    }
    Ok(f * (vlen / flen) + q_star)
}
