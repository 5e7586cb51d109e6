//! Turning coordinate fields into pictures.

mod legend;

use std::path::Path;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ExtendedColorType, ImageEncoder};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use legend::{append_legend, LEGEND_WIDTH};

use crate::field::{field_gradient, CoordinateField, ViewportTransform};
use crate::geom::Vec2;

pub type Rgba = [u8; 4];

/// 11-step sequential palette.
pub const DISCRETE_COLORS: [Rgba; 11] = [
    [68, 1, 84, 255],
    [72, 36, 117, 255],
    [65, 68, 135, 255],
    [53, 95, 141, 255],
    [42, 120, 142, 255],
    [33, 145, 140, 255],
    [34, 168, 132, 255],
    [68, 191, 112, 255],
    [122, 209, 81, 255],
    [189, 223, 38, 255],
    [253, 231, 37, 255],
];

/// Cell corners `(0,0)`, `(1,0)`, `(0,1)`, `(1,1)`: blue, pink, cyan, white.
pub const GRADIENT_CORNERS: [Rgba; 4] = [
    [40, 90, 220, 255],
    [240, 110, 200, 255],
    [60, 215, 230, 255],
    [255, 255, 255, 255],
];

pub const ADAPTIVE_TARGET_PX: f64 = 24.0;
pub const ADAPTIVE_OCTAVES: i32 = 3;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("{0} mode needs a two-dimensional target")]
    NeedsTwoDimensions(RenderMode),
    #[error("texture mode needs a texture")]
    MissingTexture,
    #[error("{name} must be positive and finite, got {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("image is {found} pixels, expected {expected}")]
    SizeMismatch { found: usize, expected: usize },
    #[error("png encoding failed: {0}")]
    Encode(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RenderMode {
    Contour,
    Discrete,
    #[serde(rename = "discrete+contour")]
    DiscreteContour,
    Adaptive,
    Gradient,
    Texture,
}

impl RenderMode {
    pub const ALL: [RenderMode; 6] = [
        RenderMode::Contour,
        RenderMode::Discrete,
        RenderMode::DiscreteContour,
        RenderMode::Adaptive,
        RenderMode::Gradient,
        RenderMode::Texture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RenderMode::Contour => "contour",
            RenderMode::Discrete => "discrete",
            RenderMode::DiscreteContour => "discrete+contour",
            RenderMode::Adaptive => "adaptive",
            RenderMode::Gradient => "gradient",
            RenderMode::Texture => "texture",
        }
    }
}

impl std::fmt::Display for RenderMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RenderMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase();
        let alias = match s.as_str() {
            "discrete-contour" | "discrete_contour" | "discrete contour" => "discrete+contour",
            other => other,
        };
        RenderMode::ALL
            .into_iter()
            .find(|m| m.name() == alias)
            .ok_or_else(|| {
                format!("unknown mode '{s}' (expected contour, discrete, discrete+contour, adaptive, gradient or texture)")
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Texture {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Rgba>,
}

impl Texture {
    pub fn load(path: impl AsRef<Path>) -> Result<Texture, image::ImageError> {
        let img = image::open(path)?.to_rgba8();
        let (w, h) = img.dimensions();
        Ok(Texture {
            width: w as usize,
            height: h as usize,
            pixels: img.pixels().map(|p| p.0).collect(),
        })
    }

    /// `size`×`size` checkerboard with `cells` squares per side.
    pub fn checkerboard(size: usize, cells: usize, a: Rgba, b: Rgba) -> Texture {
        let cell = (size / cells.max(1)).max(1);
        let pixels = (0..size * size)
            .map(|i| if ((i % size) / cell + (i / size) / cell) % 2 == 0 { a } else { b })
            .collect();
        Texture {
            width: size,
            height: size,
            pixels,
        }
    }

    #[inline]
    fn texel(&self, x: i64, y: i64) -> [f64; 4] {
        let xi = x.rem_euclid(self.width as i64) as usize;
        let yi = y.rem_euclid(self.height as i64) as usize;
        self.pixels[yi * self.width + xi].map(f64::from)
    }

    /// Bilinear sample at texture-space `(s, t)` in `[0, 1)`, `t` measured upward, wrapping.
    pub fn sample(&self, s: f64, t: f64) -> Rgba {
        let x = s * self.width as f64 - 0.5;
        let y = (1.0 - t) * self.height as f64 - 0.5;
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let (x0, y0) = (x0 as i64, y0 as i64);
        let c00 = self.texel(x0, y0);
        let c10 = self.texel(x0 + 1, y0);
        let c01 = self.texel(x0, y0 + 1);
        let c11 = self.texel(x0 + 1, y0 + 1);
        let mut out = [0u8; 4];
        for k in 0..4 {
            let top = c00[k] + (c10[k] - c00[k]) * fx;
            let bot = c01[k] + (c11[k] - c01[k]) * fx;
            out[k] = to_u8(top + (bot - top) * fy);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointStyle {
    pub radius: f64,
    pub color: Rgba,
}

impl Default for PointStyle {
    fn default() -> Self {
        PointStyle {
            radius: 2.5,
            color: [214, 39, 40, 255],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    pub mode: RenderMode,
    /// Contour interval in target units.
    pub spacing: f64,
    /// Interval for the second component when its units differ; defaults to `spacing`.
    pub spacing_v: Option<f64>,
    pub line_width_px: f64,
    pub line_color: Rgba,
    pub background: Rgba,
    pub colormap: Vec<Rgba>,
    pub corners: [Rgba; 4],
    pub texture: Option<Texture>,
    pub point_style: PointStyle,
    /// Adaptive mode: on-screen isoline separation at which a family is fully opaque.
    pub target_px: f64,
}

impl RenderSpec {
    pub fn new(mode: RenderMode, spacing: f64) -> RenderSpec {
        RenderSpec {
            mode,
            spacing,
            spacing_v: None,
            line_width_px: 1.5,
            line_color: [25, 25, 25, 255],
            background: [255, 255, 255, 255],
            colormap: DISCRETE_COLORS.to_vec(),
            corners: GRADIENT_CORNERS,
            texture: None,
            point_style: PointStyle::default(),
            target_px: ADAPTIVE_TARGET_PX,
        }
    }

    #[inline]
    pub fn spacing_for(&self, component: usize) -> f64 {
        match (component, self.spacing_v) {
            (1, Some(s)) => s,
            _ => self.spacing,
        }
    }

    pub fn validate(&self, components: usize) -> Result<(), RenderError> {
        for (name, value) in [
            ("spacing", self.spacing),
            ("spacing", self.spacing_for(1)),
            ("lineWidthPx", self.line_width_px),
            ("targetPx", self.target_px),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(RenderError::InvalidParam { name, value });
            }
        }
        if self.mode == RenderMode::Gradient && components < 2 {
            return Err(RenderError::NeedsTwoDimensions(self.mode));
        }
        if self.mode == RenderMode::Texture && self.texture.is_none() {
            return Err(RenderError::MissingTexture);
        }
        if self.colormap.is_empty() {
            return Err(RenderError::InvalidParam {
                name: "colormap length",
                value: 0.0,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedImage {
    pub width: usize,
    pub height: usize,
    /// RGBA8, row-major.
    pub pixels: Vec<u8>,
}

impl RenderedImage {
    pub fn filled(width: usize, height: usize, color: Rgba) -> RenderedImage {
        RenderedImage {
            width,
            height,
            pixels: color.repeat(width * height),
        }
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> Rgba {
        let i = 4 * (y * self.width + x);
        self.pixels[i..i + 4].try_into().unwrap()
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, c: Rgba) {
        let i = 4 * (y * self.width + x);
        self.pixels[i..i + 4].copy_from_slice(&c);
    }

    /// Composite `c` over the pixel with extra opacity `alpha`.
    #[inline]
    pub fn blend_pixel(&mut self, x: usize, y: usize, c: Rgba, alpha: f64) {
        let cur = self.pixel(x, y);
        self.set_pixel(x, y, blend(cur, c, alpha));
    }

    /// 8-bit RGBA PNG, non-interlaced.
    pub fn to_png(&self) -> Result<Vec<u8>, RenderError> {
        let mut out = Vec::new();
        PngEncoder::new_with_quality(&mut out, CompressionType::Default, FilterType::Adaptive)
            .write_image(
                &self.pixels,
                self.width as u32,
                self.height as u32,
                ExtendedColorType::Rgba8,
            )
            .map_err(|e| RenderError::Encode(e.to_string()))?;
        Ok(out)
    }

    pub fn write_png(&self, path: impl AsRef<Path>) -> Result<(), RenderError> {
        std::fs::write(path, self.to_png()?)?;
        Ok(())
    }
}

#[inline]
fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// `fg` over `bg` with opacity `alpha * fg.alpha`.
#[inline]
pub fn blend(bg: Rgba, fg: Rgba, alpha: f64) -> Rgba {
    let a = (alpha * fg[3] as f64 / 255.0).clamp(0.0, 1.0);
    if a <= 0.0 {
        return bg;
    }
    let mut out = [0u8; 4];
    for k in 0..3 {
        out[k] = to_u8(bg[k] as f64 * (1.0 - a) + fg[k] as f64 * a);
    }
    out[3] = to_u8(bg[3] as f64 + (255.0 - bg[3] as f64) * a);
    out
}

#[inline]
fn component(c: Vec2, k: usize) -> f64 {
    if k == 0 {
        c.x
    } else {
        c.y
    }
}

/// Screen distance in pixels from a value to the nearest multiple of `spacing`,
/// given the local gradient magnitude `g` in value units per pixel.
#[inline]
fn level_distance_px(value: f64, spacing: f64, g: f64) -> f64 {
    if !(g > 1e-300) {
        return f64::INFINITY;
    }
    let r = value / spacing;
    (r - r.round()).abs() * spacing / g
}

#[inline]
fn coverage(pd: f64, line_width: f64) -> f64 {
    (0.5 * line_width - pd + 0.5).clamp(0.0, 1.0)
}

/// Per-pixel gradient magnitudes of every component.
fn gradients(field: &CoordinateField) -> Vec<[f64; 2]> {
    let w = field.width;
    let mut out = vec![[0.0; 2]; field.coords.len()];
    out.par_chunks_mut(w.max(1)).enumerate().for_each(|(y, row)| {
        for (x, g) in row.iter_mut().enumerate() {
            let j = field_gradient(field, x, y);
            *g = [j.m[0][0].hypot(j.m[0][1]), j.m[1][0].hypot(j.m[1][1])];
        }
    });
    out
}

/// Minimum screen distance to any isoline of any component, in pixels.
fn min_line_distance(field: &CoordinateField, grads: &[[f64; 2]], spacing: [f64; 2]) -> Vec<f64> {
    field
        .coords
        .par_iter()
        .zip(grads.par_iter())
        .map(|(&c, g)| {
            (0..field.components.min(2))
                .map(|k| level_distance_px(component(c, k), spacing[k], g[k]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Anti-aliased isoline coverage in `[0, 1]` per pixel.
pub fn contour_coverage(field: &CoordinateField, spec: &RenderSpec) -> Vec<f64> {
    let grads = gradients(field);
    min_line_distance(field, &grads, [spec.spacing, spec.spacing_for(1)])
        .into_iter()
        .map(|pd| coverage(pd, spec.line_width_px))
        .collect()
}

/// Pixels whose distance to an isoline is below half the line width.
pub fn line_mask(field: &CoordinateField, spec: &RenderSpec) -> Vec<bool> {
    let grads = gradients(field);
    let half = 0.5 * spec.line_width_px;
    min_line_distance(field, &grads, [spec.spacing, spec.spacing_for(1)])
        .into_iter()
        .map(|pd| pd < half)
        .collect()
}

fn paint<F>(field: &CoordinateField, f: F) -> RenderedImage
where
    F: Fn(usize, Vec2) -> Rgba + Sync,
{
    let (w, h) = (field.width, field.height);
    let mut pixels = vec![0u8; 4 * w * h];
    pixels.par_chunks_mut(4).enumerate().for_each(|(i, px)| {
        px.copy_from_slice(&f(i, field.coords[i]));
    });
    RenderedImage {
        width: w,
        height: h,
        pixels,
    }
}

fn overlay_lines(img: &mut RenderedImage, cov: &[f64], color: Rgba) {
    img.pixels
        .par_chunks_mut(4)
        .zip(cov.par_iter())
        .for_each(|(px, &a)| {
            if a > 0.0 {
                let bg: Rgba = (&*px).try_into().unwrap();
                px.copy_from_slice(&blend(bg, color, a));
            }
        });
}

pub fn render_contours(field: &CoordinateField, spec: &RenderSpec) -> RenderedImage {
    let mut img = RenderedImage::filled(field.width, field.height, spec.background);
    overlay_lines(&mut img, &contour_coverage(field, spec), spec.line_color);
    img
}

/// Index of the first band and band count over component 0.
pub fn band_range(field: &CoordinateField, spacing: f64) -> (i64, i64) {
    let (lo, hi) = field.range(0);
    if !lo.is_finite() {
        return (0, 1);
    }
    let first = (lo / spacing).floor() as i64;
    let last = (hi / spacing).floor() as i64;
    (first, last - first + 1)
}

/// Palette entry for band `band`, spreading the bands present over the whole palette.
pub fn band_color(colormap: &[Rgba], band: i64, first: i64, count: i64) -> Rgba {
    let n = colormap.len() as i64;
    let rel = (band - first).clamp(0, count - 1);
    let idx = if count <= 1 { 0 } else { rel * (n - 1) / (count - 1) };
    colormap[idx as usize]
}

pub fn render_discrete(field: &CoordinateField, spec: &RenderSpec) -> RenderedImage {
    let (first, count) = band_range(field, spec.spacing);
    let mut img = paint(field, |_, c| {
        let band = (c.x / spec.spacing).floor() as i64;
        let base = band_color(&spec.colormap, band, first, count);
        if field.components > 1 && (c.y / spec.spacing_for(1)).floor().rem_euclid(2.0) == 1.0 {
            blend(base, [0, 0, 0, 255], 0.12)
        } else {
            base
        }
    });
    if spec.mode == RenderMode::DiscreteContour {
        overlay_lines(&mut img, &contour_coverage(field, spec), spec.line_color);
    }
    img
}

/// Smooth ramp from 0 at `lo` to 1 at `hi`.
#[inline]
fn smoothstep(lo: f64, hi: f64, x: f64) -> f64 {
    let t = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Opacity of the family with interval `spacing` where the field changes by `g` per pixel.
#[inline]
pub fn family_opacity(spacing: f64, g: f64, target_px: f64) -> f64 {
    if !(g > 1e-300) {
        return 0.0;
    }
    smoothstep(0.25 * target_px, target_px, spacing / g)
}

/// Per-pixel line opacity of the multi-resolution contours.
pub fn adaptive_coverage(field: &CoordinateField, spec: &RenderSpec) -> Vec<f64> {
    let grads = gradients(field);
    field
        .coords
        .par_iter()
        .zip(grads.par_iter())
        .map(|(&c, g)| {
            let mut a: f64 = 0.0;
            for k in 0..field.components.min(2) {
                for oct in -ADAPTIVE_OCTAVES..=ADAPTIVE_OCTAVES {
                    let s = spec.spacing_for(k) * 2f64.powi(oct);
                    let o = family_opacity(s, g[k], spec.target_px);
                    if o > 0.0 {
                        let pd = level_distance_px(component(c, k), s, g[k]);
                        a = a.max(o * coverage(pd, spec.line_width_px));
                    }
                }
            }
            a
        })
        .collect()
}

pub fn render_adaptive(field: &CoordinateField, spec: &RenderSpec) -> RenderedImage {
    let mut img = RenderedImage::filled(field.width, field.height, spec.background);
    overlay_lines(&mut img, &adaptive_coverage(field, spec), spec.line_color);
    img
}

/// Bilinear blend of the four corners at cell-local `(s, t)`.
pub fn corner_blend(corners: &[Rgba; 4], s: f64, t: f64) -> Rgba {
    let mut out = [0u8; 4];
    for k in 0..4 {
        let [c00, c10, c01, c11] = corners.map(|c| c[k] as f64);
        let bottom = c00 + (c10 - c00) * s;
        let top = c01 + (c11 - c01) * s;
        out[k] = to_u8(bottom + (top - bottom) * t);
    }
    out
}

#[inline]
fn cell_fraction(v: f64, spacing: f64) -> f64 {
    let r = v / spacing;
    r - r.floor()
}

pub fn render_gradient(field: &CoordinateField, spec: &RenderSpec) -> RenderedImage {
    let mut img = paint(field, |_, c| {
        corner_blend(
            &spec.corners,
            cell_fraction(c.x, spec.spacing),
            cell_fraction(c.y, spec.spacing_for(1)),
        )
    });
    overlay_lines(&mut img, &contour_coverage(field, spec), spec.line_color);
    img
}

pub fn render_texture(field: &CoordinateField, spec: &RenderSpec, texture: &Texture) -> RenderedImage {
    paint(field, |_, c| {
        texture.sample(cell_fraction(c.x, spec.spacing), cell_fraction(c.y, spec.spacing_for(1)))
    })
}

/// Dispatch on `spec.mode`.
pub fn render(field: &CoordinateField, spec: &RenderSpec) -> Result<RenderedImage, RenderError> {
    spec.validate(field.components)?;
    Ok(match spec.mode {
        RenderMode::Contour => render_contours(field, spec),
        RenderMode::Discrete | RenderMode::DiscreteContour => render_discrete(field, spec),
        RenderMode::Adaptive => render_adaptive(field, spec),
        RenderMode::Gradient => render_gradient(field, spec),
        RenderMode::Texture => render_texture(field, spec, spec.texture.as_ref().unwrap()),
    })
}

/// Disc coverage of every point, per pixel, in `[0, 1]`.
pub fn point_coverage(positions: &[Vec2], viewport: &ViewportTransform, style: &PointStyle) -> Vec<f64> {
    let (w, h) = (viewport.width, viewport.height);
    let mut cov = vec![0.0f64; w * h];
    let r = style.radius;
    for &p in positions {
        let (px, py) = viewport.to_pixel(p);
        if !(px >= 0.0 && py >= 0.0 && px <= w as f64 && py <= h as f64) {
            continue;
        }
        let x0 = (px - r - 1.0).floor().max(0.0) as usize;
        let y0 = (py - r - 1.0).floor().max(0.0) as usize;
        let x1 = ((px + r + 1.0).ceil() as usize).min(w);
        let y1 = ((py + r + 1.0).ceil() as usize).min(h);
        for y in y0..y1 {
            for x in x0..x1 {
                let d = ((x as f64 + 0.5 - px).powi(2) + (y as f64 + 0.5 - py).powi(2)).sqrt();
                let a = (r - d + 0.5).clamp(0.0, 1.0);
                let slot = &mut cov[y * w + x];
                *slot = slot.max(a);
            }
        }
    }
    cov
}

/// Anti-aliased discs at every position.
pub fn overlay_points(
    img: &mut RenderedImage,
    positions: &[Vec2],
    viewport: &ViewportTransform,
    style: &PointStyle,
) {
    if positions.is_empty() {
        return;
    }
    let cov = point_coverage(positions, viewport, style);
    for (i, &a) in cov.iter().enumerate() {
        if a > 0.0 && i < img.width * img.height {
            img.blend_pixel(i % img.width, i / img.width, style.color, a);
        }
    }
}
