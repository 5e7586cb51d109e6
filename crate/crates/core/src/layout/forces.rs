//! Pairwise force laws.

use super::LayoutParams;
use crate::geom::Vec2;

/// Softened inverse-square repulsion on `v` from `vi`: `C / (|V|^3 + η) · V`, `V = v - vi`.
#[inline]
pub fn repulsive_force(v: Vec2, vi: Vec2, p: &LayoutParams) -> Vec2 {
    let d = v - vi;
    let r = d.norm();
    d * (p.repulsion / (r * r * r + p.eta))
}

/// Edge spring on `v` toward/away from neighbor `vi`.
///
/// Magnitude `s · |V| · ln((|V| + η) / D)` along `-V̂`: attractive beyond
/// `D - η`, repulsive inside it.
#[inline]
pub fn spring_force(v: Vec2, vi: Vec2, p: &LayoutParams) -> Vec2 {
    let d = v - vi;
    let r = d.norm();
    if r == 0.0 {
        return Vec2::ZERO;
    }
    // |V| · V̂ = V
    d * (-p.spring_scale * ((r + p.eta) / p.edge_length).ln())
}

/// Push `v` away from the line through its opposite edge `vi vj`, with
/// magnitude `C / (|R|^2 + η)` where `R` runs from `v` to the line.
#[inline]
pub fn node_edge_force(v: Vec2, vi: Vec2, vj: Vec2, p: &LayoutParams) -> Vec2 {
    let e = vj - vi;
    let len2 = e.norm_sq();
    if len2 == 0.0 {
        return Vec2::ZERO;
    }
    let t = (v - vi).dot(e) / len2;
    let r = vi + e * t - v;
    let rn = r.norm();
    if rn < 1e-12 {
        return Vec2::ZERO;
    }
    r * (-p.repulsion / ((rn * rn + p.eta) * rn))
}
