//! Geometric predicates on top of adaptive-precision arithmetic.

use robust::Coord;

use crate::geom::Vec2;

#[inline]
fn c(p: Vec2) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

/// Twice the signed area of `(a, b, c)` with an exact sign.
#[inline]
pub fn orient2d(a: Vec2, b: Vec2, cc: Vec2) -> f64 {
    robust::orient2d(c(a), c(b), c(cc))
}

/// Positive when `d` lies strictly inside the circumcircle of the counter-clockwise triangle `(a, b, c)`.
#[inline]
pub fn incircle(a: Vec2, b: Vec2, cc: Vec2, d: Vec2) -> f64 {
    robust::incircle(c(a), c(b), c(cc), c(d))
}

/// Signed area of the triangle `(a, b, c)`; positive iff counter-clockwise.
///
/// The sign is exact even for nearly degenerate triangles.
#[inline]
pub fn signed_area(a: Vec2, b: Vec2, cc: Vec2) -> f64 {
    0.5 * orient2d(a, b, cc)
}
