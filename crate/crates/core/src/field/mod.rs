//! Per-pixel coordinate fields.
//!
//! A [`CoordinateField`] stores, for every pixel of the output image, the
//! coordinate that pixel maps to in target space. Targets are either the
//! undistorted projection (so the field undoes the layout) or the values of
//! one or two data columns.

mod linear;
pub mod mls;

use std::io::{self, Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use linear::{barycentric, linear_interp, TriangleLocator};
pub use mls::{affine_mls, mean_mls, mls_weight, rigid_mls, rigid_mls_raw, DegenerateRotation, Weight};

use crate::dataset::Dataset;
use crate::geom::{Aabb, Mat2, Vec2};
use crate::mesh::TriMesh;
use crate::projection::VIEWPORT_MARGIN;

pub const ALPHA_MIN_EXCLUSIVE: f64 = 0.1;
pub const ALPHA_MAX: f64 = 4.0;
/// Range offered by interactive controls.
pub const ALPHA_SLIDER: (f64, f64) = (0.25, 3.0);
pub const DEFAULT_REG_EPS: f64 = 1e-9;
/// Snap radius in pixels.
pub const SNAP_PIXELS: f64 = 0.25;
pub const MAX_PIXELS: usize = 8192 * 8192;

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("alpha must lie in (0.1, 4.0], got {0}")]
    InvalidAlpha(f64),
    #[error("{name} must be positive and finite, got {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("{positions} positions but {targets} targets")]
    LengthMismatch { positions: usize, targets: usize },
    #[error("no control points")]
    NoControls,
    #[error("target {0} is not finite")]
    NonFiniteTarget(usize),
    #[error("the rigid variant needs two target dimensions")]
    RigidSingleDimension,
    #[error("linear interpolation needs a triangulation")]
    MeshRequired,
    #[error("invalid raster size {0}x{1}")]
    InvalidSize(usize, usize),
    #[error("malformed raster: {0}")]
    Raster(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MlsVariant {
    Linear,
    Mean,
    Affine,
    Rigid,
}

impl MlsVariant {
    pub const ALL: [MlsVariant; 4] = [
        MlsVariant::Linear,
        MlsVariant::Mean,
        MlsVariant::Affine,
        MlsVariant::Rigid,
    ];

    pub fn default_alpha(self) -> f64 {
        match self {
            MlsVariant::Affine => 1.5,
            _ => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MlsVariant::Linear => "linear",
            MlsVariant::Mean => "mean",
            MlsVariant::Affine => "affine",
            MlsVariant::Rigid => "rigid",
        }
    }
}

impl std::str::FromStr for MlsVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MlsVariant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown variant '{s}' (expected linear, mean, affine or rigid)"))
    }
}

impl std::fmt::Display for MlsVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MlsParams {
    pub alpha: f64,
    pub variant: MlsVariant,
    /// Squared snap distance in projection units; `None` derives it from the
    /// viewport as a quarter pixel.
    pub epsilon_dist: Option<f64>,
    /// Relative to the trace of the affine moment matrix.
    pub reg_eps: f64,
}

impl MlsParams {
    pub fn new(variant: MlsVariant) -> MlsParams {
        MlsParams {
            alpha: variant.default_alpha(),
            variant,
            epsilon_dist: None,
            reg_eps: DEFAULT_REG_EPS,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> MlsParams {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        if !(self.alpha > ALPHA_MIN_EXCLUSIVE && self.alpha <= ALPHA_MAX) {
            return Err(FieldError::InvalidAlpha(self.alpha));
        }
        if !(self.reg_eps > 0.0 && self.reg_eps.is_finite()) {
            return Err(FieldError::InvalidParam {
                name: "regEps",
                value: self.reg_eps,
            });
        }
        if let Some(e) = self.epsilon_dist {
            if !(e > 0.0 && e.is_finite()) {
                return Err(FieldError::InvalidParam {
                    name: "epsilonDist",
                    value: e,
                });
            }
        }
        Ok(())
    }

    pub fn epsilon_for(&self, viewport: &ViewportTransform) -> f64 {
        self.epsilon_dist.unwrap_or_else(|| {
            let r = SNAP_PIXELS * viewport.scale;
            r * r
        })
    }
}

/// What the targets of a field represent.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetMode {
    Projection,
    Dimension { index: usize, name: String },
    Pair { a: usize, b: usize, names: [String; 2] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetAssignment {
    /// Control targets in the units the field is solved in.
    pub targets: Vec<Vec2>,
    pub mode: TargetMode,
    /// Solved coordinates are mapped to output units as `c * scale + offset`, per component.
    pub scale: Vec2,
    pub offset: Vec2,
}

/// Standardized values of column `idx` plus the map back to its own units.
fn standardized(ds: &Dataset, idx: usize) -> (Vec<f64>, f64, f64) {
    let c = ds.column(idx);
    if ds.is_normalized() {
        let scale = if c.constant { 0.0 } else { c.stats.stdev };
        return (c.values.clone(), scale, c.stats.mean);
    }
    let (mean, sd) = (c.stats.mean, c.stats.stdev);
    if !(sd > 1e-12 * mean.abs().max(1.0)) {
        return (vec![0.0; c.values.len()], 0.0, mean);
    }
    (c.values.iter().map(|x| (x - mean) / sd).collect(), sd, mean)
}

impl TargetAssignment {
    /// Undistorted projection coordinates.
    pub fn projection(original: &[Vec2]) -> TargetAssignment {
        TargetAssignment::custom(original.to_vec(), TargetMode::Projection)
    }

    /// Arbitrary targets used as-is.
    pub fn custom(targets: Vec<Vec2>, mode: TargetMode) -> TargetAssignment {
        TargetAssignment {
            targets,
            mode,
            scale: Vec2::new(1.0, 1.0),
            offset: Vec2::ZERO,
        }
    }

    /// `(value, 0)` per row. The field is solved on standardized values and
    /// reported in the column's own units.
    pub fn dimension(ds: &Dataset, index: usize) -> TargetAssignment {
        let (z, scale, offset) = standardized(ds, index);
        TargetAssignment {
            targets: z.into_iter().map(|v| Vec2::new(v, 0.0)).collect(),
            mode: TargetMode::Dimension {
                index,
                name: ds.column(index).name.clone(),
            },
            scale: Vec2::new(scale, 1.0),
            offset: Vec2::new(offset, 0.0),
        }
    }

    pub fn pair(ds: &Dataset, a: usize, b: usize) -> TargetAssignment {
        let (za, sa, oa) = standardized(ds, a);
        let (zb, sb, ob) = standardized(ds, b);
        TargetAssignment {
            targets: za.into_iter().zip(zb).map(|(x, y)| Vec2::new(x, y)).collect(),
            mode: TargetMode::Pair {
                a,
                b,
                names: [ds.column(a).name.clone(), ds.column(b).name.clone()],
            },
            scale: Vec2::new(sa, sb),
            offset: Vec2::new(oa, ob),
        }
    }

    /// Target `i` in output units.
    pub fn output_target(&self, i: usize) -> Vec2 {
        self.to_output(self.targets[i])
    }

    #[inline]
    pub fn to_output(&self, c: Vec2) -> Vec2 {
        Vec2::new(c.x * self.scale.x + self.offset.x, c.y * self.scale.y + self.offset.y)
    }

    fn is_identity_map(&self) -> bool {
        self.scale == Vec2::new(1.0, 1.0) && self.offset == Vec2::ZERO
    }

    /// Number of meaningful target components.
    pub fn components(&self) -> usize {
        match self.mode {
            TargetMode::Dimension { .. } => 1,
            _ => 2,
        }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

/// Pixel grid placed over projection space. Pixel `(x, y)` covers
/// `[x, x+1) × [y, y+1)` with `y` growing downward; projection `y` grows upward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewportTransform {
    /// Projection coordinates of the image's top-left corner.
    pub origin: Vec2,
    /// Projection units per pixel, equal on both axes.
    pub scale: f64,
    pub width: usize,
    pub height: usize,
}

impl ViewportTransform {
    /// Smallest square-pixel grid that shows `bounds` centered.
    pub fn fit(bounds: Aabb, width: usize, height: usize) -> ViewportTransform {
        let (w, h) = (width.max(1) as f64, height.max(1) as f64);
        let mut scale = (bounds.width() / w).max(bounds.height() / h);
        if !(scale > 0.0) {
            scale = 1.0 / w.max(h);
        }
        let c = bounds.center();
        ViewportTransform {
            origin: Vec2::new(c.x - 0.5 * w * scale, c.y + 0.5 * h * scale),
            scale,
            width,
            height,
        }
    }

    /// Framing used for rendered plots: point bounds plus a 5% margin.
    pub fn for_positions(positions: &[Vec2], width: usize, height: usize) -> ViewportTransform {
        let bounds = Aabb::of_points(positions)
            .map(|b| b.expanded(VIEWPORT_MARGIN))
            .unwrap_or(Aabb {
                min: Vec2::new(-1.0, -1.0),
                max: Vec2::new(1.0, 1.0),
            });
        ViewportTransform::fit(bounds, width, height)
    }

    /// Projection coordinates of continuous pixel position `(px, py)`.
    #[inline]
    pub fn to_projection(&self, px: f64, py: f64) -> Vec2 {
        Vec2::new(self.origin.x + px * self.scale, self.origin.y - py * self.scale)
    }

    #[inline]
    pub fn pixel_center(&self, x: usize, y: usize) -> Vec2 {
        self.to_projection(x as f64 + 0.5, y as f64 + 0.5)
    }

    /// Continuous pixel position of a projection-space point.
    #[inline]
    pub fn to_pixel(&self, p: Vec2) -> (f64, f64) {
        ((p.x - self.origin.x) / self.scale, (self.origin.y - p.y) / self.scale)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateField {
    pub width: usize,
    pub height: usize,
    /// Row-major, top row first.
    pub coords: Vec<Vec2>,
    pub source_positions: Vec<Vec2>,
    pub viewport: ViewportTransform,
    pub components: usize,
}

impl CoordinateField {
    /// Evaluate `f` at every pixel center.
    pub fn from_fn<F>(viewport: ViewportTransform, components: usize, f: F) -> CoordinateField
    where
        F: Fn(Vec2) -> Vec2 + Sync,
    {
        let (w, h) = (viewport.width, viewport.height);
        let mut coords = vec![Vec2::ZERO; w * h];
        coords.par_chunks_mut(w.max(1)).enumerate().for_each(|(y, row)| {
            for (x, c) in row.iter_mut().enumerate() {
                *c = f(viewport.pixel_center(x, y));
            }
        });
        CoordinateField {
            width: w,
            height: h,
            coords,
            source_positions: Vec::new(),
            viewport,
            components,
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> Vec2 {
        self.coords[y * self.width + x]
    }

    /// `(min, max)` of one component over the whole field.
    pub fn range(&self, component: usize) -> (f64, f64) {
        self.coords.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            let v = if component == 0 { c.x } else { c.y };
            (lo.min(v), hi.max(v))
        })
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    /// `MLSF` magic, `u32` width and height, then row-major `f64` pairs, all little-endian.
    pub fn write_raster<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(b"MLSF")?;
        out.write_all(&(self.width as u32).to_le_bytes())?;
        out.write_all(&(self.height as u32).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.coords.len() * 16);
        for c in &self.coords {
            buf.extend_from_slice(&c.x.to_le_bytes());
            buf.extend_from_slice(&c.y.to_le_bytes());
        }
        out.write_all(&buf)
    }

    pub fn to_raster_bytes(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(12 + self.coords.len() * 16);
        self.write_raster(&mut v).expect("writing to a Vec cannot fail");
        v
    }
}

/// Decoded `MLSF` raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub coords: Vec<Vec2>,
}

pub fn read_raster<R: Read>(mut input: R) -> Result<Raster, FieldError> {
    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| FieldError::Raster(e.to_string()))?;
    if bytes.len() < 12 || &bytes[..4] != b"MLSF" {
        return Err(FieldError::Raster("missing MLSF header".into()));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (width, height) = (u32_at(4), u32_at(8));
    let body = &bytes[12..];
    if body.len() != width * height * 16 {
        return Err(FieldError::Raster(format!(
            "expected {} payload bytes, found {}",
            width * height * 16,
            body.len()
        )));
    }
    let f64_at = |i: usize| f64::from_le_bytes(body[i..i + 8].try_into().unwrap());
    let coords = (0..width * height)
        .map(|i| Vec2::new(f64_at(16 * i), f64_at(16 * i + 8)))
        .collect();
    Ok(Raster { width, height, coords })
}

fn check_inputs(
    positions: &[Vec2],
    targets: &TargetAssignment,
    params: &MlsParams,
    width: usize,
    height: usize,
) -> Result<(), FieldError> {
    params.validate()?;
    if width == 0 || height == 0 || width.saturating_mul(height) > MAX_PIXELS {
        return Err(FieldError::InvalidSize(width, height));
    }
    if positions.is_empty() {
        return Err(FieldError::NoControls);
    }
    if positions.len() != targets.len() {
        return Err(FieldError::LengthMismatch {
            positions: positions.len(),
            targets: targets.len(),
        });
    }
    if let Some(i) = targets.targets.iter().position(|q| !q.is_finite()) {
        return Err(FieldError::NonFiniteTarget(i));
    }
    if params.variant == MlsVariant::Rigid && targets.components() == 1 {
        return Err(FieldError::RigidSingleDimension);
    }
    Ok(())
}

/// Evaluate the field over the standard framing of `positions`.
pub fn compute_field(
    mesh: &TriMesh,
    positions: &[Vec2],
    targets: &TargetAssignment,
    params: &MlsParams,
    width: usize,
    height: usize,
) -> Result<CoordinateField, FieldError> {
    let viewport = ViewportTransform::for_positions(positions, width, height);
    compute_field_in(viewport, Some(mesh), positions, targets, params)
}

/// Evaluate the field over an explicit viewport. Only the linear variant needs `mesh`.
pub fn compute_field_in(
    viewport: ViewportTransform,
    mesh: Option<&TriMesh>,
    positions: &[Vec2],
    targets: &TargetAssignment,
    params: &MlsParams,
) -> Result<CoordinateField, FieldError> {
    let (w, h) = (viewport.width, viewport.height);
    check_inputs(positions, targets, params, w, h)?;
    let p = positions;
    let q = &targets.targets[..];
    let alpha = params.alpha;
    let eps = params.epsilon_for(&viewport);
    let reg = params.reg_eps;

    let mut coords = vec![Vec2::ZERO; w * h];
    match params.variant {
        MlsVariant::Linear => {
            let mesh = mesh.ok_or(FieldError::MeshRequired)?;
            if mesh.node_count() != p.len() {
                return Err(FieldError::LengthMismatch {
                    positions: p.len(),
                    targets: mesh.node_count(),
                });
            }
            let locator = TriangleLocator::new(mesh, p);
            coords.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
                for (x, c) in row.iter_mut().enumerate() {
                    let v = viewport.pixel_center(x, y);
                    *c = locator
                        .interpolate(v, q)
                        .unwrap_or_else(|| mls::mean_mls(v, p, q, alpha, eps));
                }
            });
        }
        variant => {
            coords.par_chunks_mut(w).enumerate().for_each_init(
                || Vec::with_capacity(p.len()),
                |scratch, (y, row)| {
                    for (x, c) in row.iter_mut().enumerate() {
                        let v = viewport.pixel_center(x, y);
                        *c = match variant {
                            MlsVariant::Affine => mls::affine_with(v, p, q, alpha, eps, reg, scratch),
                            MlsVariant::Rigid => mls::rigid_with(v, p, q, alpha, eps, scratch)
                                .unwrap_or_else(|_| mls::mean_with(v, p, q, alpha, eps)),
                            _ => mls::mean_with(v, p, q, alpha, eps),
                        };
                    }
                },
            );
        }
    }

    if !targets.is_identity_map() {
        coords.par_iter_mut().for_each(|c| *c = targets.to_output(*c));
    }
    Ok(CoordinateField {
        width: w,
        height: h,
        coords,
        source_positions: p.to_vec(),
        viewport,
        components: targets.components(),
    })
}

/// Finite-difference Jacobian at pixel `(x, y)`.
///
/// Row `r` holds the derivatives of component `r`; column 0 is along `+x`
/// (rightward) and column 1 along `+y` upward, both per pixel. Central
/// differences inside, one-sided on the border.
pub fn field_gradient(field: &CoordinateField, x: usize, y: usize) -> Mat2 {
    let (w, h) = (field.width, field.height);
    let dx = if w < 2 {
        Vec2::ZERO
    } else if x == 0 {
        field.at(1, y) - field.at(0, y)
    } else if x + 1 == w {
        field.at(x, y) - field.at(x - 1, y)
    } else {
        (field.at(x + 1, y) - field.at(x - 1, y)) * 0.5
    };
    let dy_up = if h < 2 {
        Vec2::ZERO
    } else if y == 0 {
        field.at(x, 0) - field.at(x, 1)
    } else if y + 1 == h {
        field.at(x, y - 1) - field.at(x, y)
    } else {
        (field.at(x, y - 1) - field.at(x, y + 1)) * 0.5
    };
    Mat2::new(dx.x, dy_up.x, dx.y, dy_up.y)
}

/// Gradient magnitude of one component at every pixel, in target units per pixel.
pub fn gradient_magnitudes(field: &CoordinateField, component: usize) -> Vec<f64> {
    let w = field.width;
    let mut out = vec![0.0; field.coords.len()];
    out.par_chunks_mut(w.max(1)).enumerate().for_each(|(y, row)| {
        for (x, g) in row.iter_mut().enumerate() {
            let j = field_gradient(field, x, y);
            let r = j.m[component.min(1)];
            *g = (r[0] * r[0] + r[1] * r[1]).sqrt();
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_viewport(n: usize) -> ViewportTransform {
        ViewportTransform::fit(
            Aabb {
                min: Vec2::ZERO,
                max: Vec2::new(1.0, 1.0),
            },
            n,
            n,
        )
    }

    #[test]
    fn viewport_roundtrip_and_aspect() {
        let vt = ViewportTransform::fit(
            Aabb {
                min: Vec2::new(-2.0, 0.0),
                max: Vec2::new(2.0, 1.0),
            },
            200,
            200,
        );
        assert!((vt.scale - 0.02).abs() < 1e-15);
        let c = vt.to_projection(100.0, 100.0);
        assert!((c - Vec2::new(0.0, 0.5)).norm() < 1e-12);
        let (px, py) = vt.to_pixel(Vec2::new(1.0, 0.75));
        assert!((px - 150.0).abs() < 1e-9 && (py - 87.5).abs() < 1e-9);
        // y flips: larger projection y is higher up.
        assert!(vt.pixel_center(0, 0).y > vt.pixel_center(0, 1).y);
    }

    #[test]
    fn single_control_uniform_shift() {
        let vt = unit_viewport(16);
        let p = [Vec2::new(0.3, 0.4)];
        let t = TargetAssignment::custom(vec![Vec2::new(1.3, 0.4)], TargetMode::Projection);
        for variant in [MlsVariant::Mean, MlsVariant::Affine] {
            let f = compute_field_in(vt, None, &p, &t, &MlsParams::new(variant)).unwrap();
            for y in 0..16 {
                for x in 0..16 {
                    let expect = vt.pixel_center(x, y) + Vec2::new(1.0, 0.0);
                    let got = f.at(x, y);
                    assert!((got - expect).norm() < 1e-12 || got == Vec2::new(1.3, 0.4), "{variant} {got:?} {expect:?}");
                }
            }
        }
    }

    #[test]
    fn gradient_cases() {
        let vt = unit_viewport(20);
        let s = vt.scale;
        let id = CoordinateField::from_fn(vt, 2, |v| v);
        let j = field_gradient(&id, 7, 9);
        assert!((j.m[0][0] - s).abs() < 1e-12 && (j.m[1][1] - s).abs() < 1e-12);
        assert!(j.m[0][1].abs() < 1e-12 && j.m[1][0].abs() < 1e-12);

        let k = CoordinateField::from_fn(vt, 2, |_| Vec2::new(3.0, -1.0));
        assert_eq!(field_gradient(&k, 0, 19), Mat2::ZERO);

        let dbl = CoordinateField::from_fn(vt, 1, |v| Vec2::new(2.0 * v.x, 0.0));
        assert!((field_gradient(&dbl, 5, 5).m[0][0] - 2.0 * s).abs() < 1e-12);
    }

    #[test]
    fn raster_roundtrip() {
        let f = CoordinateField::from_fn(unit_viewport(5), 2, |v| Vec2::new(v.x, -v.y));
        let bytes = f.to_raster_bytes();
        assert_eq!(&bytes[..4], b"MLSF");
        assert_eq!(bytes.len(), 12 + 25 * 16);
        let r = read_raster(&bytes[..]).unwrap();
        assert_eq!((r.width, r.height), (5, 5));
        assert_eq!(r.coords, f.coords);
        assert!(read_raster(&bytes[..20]).is_err());
    }

    #[test]
    fn rigid_rejected_for_one_dimension() {
        let ds = Dataset::from_columns(vec![("a".into(), vec![1.0, 2.0, 3.0])]).unwrap();
        let t = TargetAssignment::dimension(&ds, 0);
        let p = [Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        let err = compute_field_in(unit_viewport(4), None, &p, &t, &MlsParams::new(MlsVariant::Rigid));
        assert_eq!(err.unwrap_err(), FieldError::RigidSingleDimension);
    }

    #[test]
    fn dimension_targets_report_column_units() {
        let ds = Dataset::from_columns(vec![
            ("a".into(), vec![10.0, 20.0, 30.0, 40.0]),
            ("k".into(), vec![7.0; 4]),
        ])
        .unwrap();
        let t = TargetAssignment::dimension(&ds, 0);
        for (i, raw) in [10.0, 20.0, 30.0, 40.0].into_iter().enumerate() {
            assert!((t.output_target(i).x - raw).abs() < 1e-12);
        }
        let k = TargetAssignment::dimension(&ds, 1);
        assert!(k.targets.iter().all(|q| q.x == 0.0));
        assert_eq!(k.output_target(2).x, 7.0);

        let normalized = crate::dataset::normalize(&ds);
        let tn = TargetAssignment::dimension(&normalized, 0);
        assert!((tn.output_target(3).x - 40.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_validation() {
        assert!(MlsParams::new(MlsVariant::Mean).with_alpha(0.1).validate().is_err());
        assert!(MlsParams::new(MlsVariant::Mean).with_alpha(4.0).validate().is_ok());
        assert!(MlsParams::new(MlsVariant::Mean).with_alpha(f64::NAN).validate().is_err());
        assert_eq!("Affine".parse::<MlsVariant>(), Ok(MlsVariant::Affine));
        assert!("similarity".parse::<MlsVariant>().is_err());
    }
}
