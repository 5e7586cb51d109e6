//! The full batch pipeline from CSV to PNG, shared by the command line and the HTTP service.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dataset::{load_csv, normalize, CsvOptions, Dataset, DatasetError};
use crate::field::{compute_field, CoordinateField, FieldError, MlsParams, MlsVariant, TargetAssignment, TargetMode};
use crate::geom::Vec2;
use crate::layout::{interpolate_positions, layout_run, LayoutError, LayoutOverrides, LayoutState};
use crate::mesh::{delaunay, MeshError};
use crate::projection::{pca_project, ProjectionError, ProjectionModel};
use crate::render::{append_legend, overlay_points, render, RenderError, RenderMode, RenderSpec, RenderedImage, Texture};

pub const MAX_SIDE: usize = 8192;
pub const DEFAULT_SIZE: (usize, usize) = (600, 600);
pub const DEFAULT_OUTPUT: &str = "mdcontour_{dim}.png";

#[derive(Debug, Error)]
pub enum PipelineError {
    /// Bad configuration or arguments; the command line exits with status 2.
    #[error("{0}")]
    Usage(String),
    #[error("unknown dimension '{name}'; available columns: {}", available.join(", "))]
    UnknownDimension { name: String, available: Vec<String> },
    #[error("load: {0}")]
    Load(#[from] DatasetError),
    #[error("projection: {0}")]
    Projection(#[from] ProjectionError),
    #[error("triangulation: {0}")]
    Mesh(#[from] MeshError),
    #[error("layout: {0}")]
    Layout(#[from] LayoutError),
    #[error("field: {0}")]
    Field(#[from] FieldError),
    #[error("render: {0}")]
    Render(#[from] RenderError),
    #[error("write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl PipelineError {
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            PipelineError::Usage(_)
                | PipelineError::UnknownDimension { .. }
                | PipelineError::Layout(LayoutError::InvalidParam { .. })
        )
    }

    pub fn stage(&self) -> &'static str {
        match self {
            PipelineError::Usage(_) | PipelineError::UnknownDimension { .. } => "config",
            PipelineError::Load(_) => "load",
            PipelineError::Projection(_) => "projection",
            PipelineError::Mesh(_) => "triangulation",
            PipelineError::Layout(_) => "layout",
            PipelineError::Field(_) => "field",
            PipelineError::Render(_) => "render",
            PipelineError::Write { .. } => "write",
        }
    }
}

/// What a single output image shows.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DimSpec {
    /// Undistorted projection coordinates.
    Projection,
    Column(String),
    Pair(String, String),
}

impl DimSpec {
    /// File-name friendly label.
    pub fn label(&self) -> String {
        let clean = |s: &str| -> String {
            s.chars()
                .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
                .collect()
        };
        match self {
            DimSpec::Projection => "projection".into(),
            DimSpec::Column(n) => clean(n),
            DimSpec::Pair(a, b) => format!("{}-{}", clean(a), clean(b)),
        }
    }

    /// Inverse of [`parse_dims`] for a single entry.
    pub fn parse(s: &str) -> Result<DimSpec, PipelineError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(PipelineError::Usage("empty dimension name".into()));
        }
        if s.eq_ignore_ascii_case("@projection") {
            return Ok(DimSpec::Projection);
        }
        match s.split_once(':') {
            Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
                Ok(DimSpec::Pair(a.trim().to_string(), b.trim().to_string()))
            }
            Some(_) => Err(PipelineError::Usage(format!("malformed dimension pair '{s}'"))),
            None => Ok(DimSpec::Column(s.to_string())),
        }
    }
}

/// `all`, or a comma-separated list of column names, `a:b` pairs and `@projection`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DimSelection {
    All,
    List(Vec<DimSpec>),
}

pub fn parse_dims(s: &str) -> Result<DimSelection, PipelineError> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(DimSelection::All);
    }
    let list = s.split(',').map(DimSpec::parse).collect::<Result<Vec<_>, _>>()?;
    Ok(DimSelection::List(list))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    Auto,
    Value(f64),
}

impl std::str::FromStr for Spacing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Spacing::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(Spacing::Value(v)),
            _ => Err(format!("spacing must be 'auto' or a positive number, got '{s}'")),
        }
    }
}

/// `WxH`, e.g. `600x600`.
pub fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("resolution must look like 600x600, got '{s}'"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("invalid resolution '{s}'"));
    let (w, h) = (parse(w)?, parse(h)?);
    check_resolution(w, h)?;
    Ok((w, h))
}

pub fn check_resolution(w: usize, h: usize) -> Result<(), String> {
    if w == 0 || h == 0 || w > MAX_SIDE || h > MAX_SIDE {
        return Err(format!("resolution {w}x{h} outside 1..={MAX_SIDE} per side"));
    }
    Ok(())
}

/// Per-image rendering choices.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub variant: MlsVariant,
    /// `None` uses the variant's default exponent.
    pub alpha: Option<f64>,
    pub relax: f64,
    pub mode: RenderMode,
    pub spacing: Spacing,
    pub width: usize,
    pub height: usize,
    pub legend: bool,
    pub texture: Option<Texture>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            variant: MlsVariant::Affine,
            alpha: None,
            relax: 1.0,
            mode: RenderMode::Contour,
            spacing: Spacing::Auto,
            width: DEFAULT_SIZE.0,
            height: DEFAULT_SIZE.1,
            legend: false,
            texture: None,
        }
    }
}

impl RenderOptions {
    pub fn mls_params(&self) -> MlsParams {
        let p = MlsParams::new(self.variant);
        match self.alpha {
            Some(a) => p.with_alpha(a),
            None => p,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(0.0..=1.0).contains(&self.relax) {
            return Err(PipelineError::Usage(format!("relax must lie in [0, 1], got {}", self.relax)));
        }
        check_resolution(self.width, self.height).map_err(PipelineError::Usage)?;
        self.mls_params().validate().map_err(|e| PipelineError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub csv: CsvOptions,
    pub dims: DimSelection,
    pub render: RenderOptions,
    pub layout: LayoutOverrides,
    /// Only drives the duplicate-point jitter.
    pub seed: u64,
    /// Must contain `{dim}`.
    pub output: String,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>) -> PipelineConfig {
        PipelineConfig {
            input: input.into(),
            csv: CsvOptions::default(),
            dims: DimSelection::All,
            render: RenderOptions::default(),
            layout: LayoutOverrides::default(),
            seed: 0,
            output: DEFAULT_OUTPUT.to_string(),
        }
    }

    pub fn output_path(&self, dim: &DimSpec) -> PathBuf {
        PathBuf::from(self.output.replace("{dim}", &dim.label()))
    }
}

/// Everything up to and including the layout; reused across images.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// Columns in original units.
    pub raw: Dataset,
    pub normalized: Dataset,
    pub model: ProjectionModel,
    pub layout: LayoutState,
}

impl Prepared {
    pub fn from_dataset(raw: Dataset, overrides: &LayoutOverrides, seed: u64) -> Result<Prepared, PipelineError> {
        let normalized = normalize(&raw);
        let (model, cloud) = pca_project(&normalized)?;
        let mesh = delaunay(&cloud, seed)?;
        let params = overrides.resolve(&mesh)?;
        log::info!(
            "{} nodes, {} triangles, edge length {:.4}",
            mesh.node_count(),
            mesh.triangle_count(),
            params.edge_length
        );
        let layout = layout_run(mesh, params)?;
        Ok(Prepared {
            raw,
            normalized,
            model,
            layout,
        })
    }

    pub fn load(cfg: &PipelineConfig) -> Result<Prepared, PipelineError> {
        let raw = load_csv(&cfg.input, &cfg.csv)?;
        Prepared::from_dataset(raw, &cfg.layout, cfg.seed)
    }

    /// Replace the layout with a fresh run from the projected positions.
    pub fn relayout(&self, overrides: &LayoutOverrides) -> Result<LayoutState, PipelineError> {
        let params = overrides.resolve(&self.layout.mesh)?;
        Ok(layout_run(self.layout.mesh.clone(), params)?)
    }

    pub fn original(&self) -> &[Vec2] {
        &self.layout.mesh.original
    }

    /// Point positions at relaxation `t`.
    pub fn positions_at(&self, t: f64) -> Result<Vec<Vec2>, PipelineError> {
        Ok(interpolate_positions(self.original(), &self.layout.relaxed, t)?)
    }

    pub fn column_names(&self) -> Vec<String> {
        self.raw.names().into_iter().map(String::from).collect()
    }

    fn column(&self, name: &str) -> Result<usize, PipelineError> {
        self.raw.column_index(name).ok_or_else(|| PipelineError::UnknownDimension {
            name: name.to_string(),
            available: self.column_names(),
        })
    }

    pub fn resolve_dims(&self, sel: &DimSelection) -> Result<Vec<DimSpec>, PipelineError> {
        let list = match sel {
            DimSelection::All => self.column_names().into_iter().map(DimSpec::Column).collect(),
            DimSelection::List(l) => l.clone(),
        };
        for d in &list {
            match d {
                DimSpec::Projection => {}
                DimSpec::Column(n) => {
                    self.column(n)?;
                }
                DimSpec::Pair(a, b) => {
                    self.column(a)?;
                    self.column(b)?;
                }
            }
        }
        Ok(list)
    }

    pub fn targets(&self, dim: &DimSpec) -> Result<TargetAssignment, PipelineError> {
        Ok(match dim {
            DimSpec::Projection => TargetAssignment::projection(self.original()),
            DimSpec::Column(n) => TargetAssignment::dimension(&self.normalized, self.column(n)?),
            DimSpec::Pair(a, b) => TargetAssignment::pair(&self.normalized, self.column(a)?, self.column(b)?),
        })
    }

    /// Field stage of [`Prepared::render`].
    pub fn field(&self, dim: &DimSpec, opts: &RenderOptions) -> Result<FieldBundle, PipelineError> {
        opts.validate()?;
        let targets = self.targets(dim)?;
        if opts.variant == MlsVariant::Rigid && targets.components() == 1 {
            return Err(PipelineError::Usage(format!(
                "the rigid variant needs two target dimensions; '{}' is a single column",
                dim.label()
            )));
        }
        let positions = self.positions_at(opts.relax)?;
        let flips = self.layout.mesh.count_flips(&positions);
        if flips > 0 {
            log::warn!("{flips} triangles inverted at relax {}", opts.relax);
        }
        let field = compute_field(
            &self.layout.mesh,
            &positions,
            &targets,
            &opts.mls_params(),
            opts.width,
            opts.height,
        )?;
        Ok(FieldBundle {
            field,
            positions,
            auto_spacing: target_spacing(&targets),
            flips,
        })
    }

    /// Paint stage of [`Prepared::render`]; only the mode, spacing, legend
    /// and texture of `opts` matter here.
    pub fn paint(&self, bundle: &FieldBundle, opts: &RenderOptions) -> Result<RenderedImage, PipelineError> {
        let field = &bundle.field;
        if opts.mode == RenderMode::Gradient && field.components == 1 {
            return Err(PipelineError::Usage(
                "gradient mode needs two target dimensions (use a:b or @projection)".into(),
            ));
        }
        let spacing = match opts.spacing {
            Spacing::Value(s) => [s, s],
            Spacing::Auto => bundle.auto_spacing,
        };
        let mut spec = RenderSpec::new(opts.mode, spacing[0]);
        spec.spacing_v = Some(spacing[1]);
        if opts.mode == RenderMode::Texture {
            spec.texture = Some(
                opts.texture
                    .clone()
                    .unwrap_or_else(|| Texture::checkerboard(256, 8, [40, 40, 40, 255], [235, 235, 235, 255])),
            );
        }
        let mut img = render(field, &spec)?;
        overlay_points(&mut img, &bundle.positions, &field.viewport, &spec.point_style);
        if opts.legend {
            let (lo, hi) = field.range(0);
            img = append_legend(&img, &spec, lo, hi);
        }
        Ok(img)
    }

    /// One finished image, point overlay and optional legend included.
    pub fn render(&self, dim: &DimSpec, opts: &RenderOptions) -> Result<RenderedImage, PipelineError> {
        if opts.mode == RenderMode::Gradient && !matches!(dim, DimSpec::Projection | DimSpec::Pair(..)) {
            return Err(PipelineError::Usage(
                "gradient mode needs two target dimensions (use a:b or @projection)".into(),
            ));
        }
        let bundle = self.field(dim, opts)?;
        self.paint(&bundle, opts)
    }
}

/// A computed field with the positions it was built from.
#[derive(Debug, Clone)]
pub struct FieldBundle {
    pub field: CoordinateField,
    pub positions: Vec<Vec2>,
    pub auto_spacing: [f64; 2],
    /// Triangles inverted at these positions.
    pub flips: usize,
}

/// Auto spacing per component, from the target values in output units.
fn target_spacing(targets: &TargetAssignment) -> [f64; 2] {
    let out: Vec<Vec2> = (0..targets.len()).map(|i| targets.output_target(i)).collect();
    let xs: Vec<f64> = out.iter().map(|q| q.x).collect();
    let ys: Vec<f64> = out.iter().map(|q| q.y).collect();
    match targets.mode {
        TargetMode::Pair { .. } => [auto_spacing(&xs), auto_spacing(&ys)],
        TargetMode::Projection => {
            // Shared units: one interval keeps the grid square.
            let s = auto_spacing(&xs).max(auto_spacing(&ys));
            [s, s]
        }
        TargetMode::Dimension { .. } => {
            let s = auto_spacing(&xs);
            [s, s]
        }
    }
}

/// A `{1, 2, 5} × 10^k` interval that cuts the value range into 8 to 15
/// levels, or the ladder step whose level count comes closest.
pub fn auto_spacing(values: &[f64]) -> f64 {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if !(range > 0.0 && range.is_finite()) {
        return 1.0;
    }
    let e = range.log10().floor() as i32;
    let mut best = (f64::INFINITY, 1.0);
    for k in (e - 3)..=(e + 1) {
        for m in [1.0, 2.0, 5.0] {
            let s = if k < 0 { m / 10f64.powi(-k) } else { m * 10f64.powi(k) };
            let levels = range / s;
            let miss = if levels < 8.0 {
                (8.0 / levels).ln()
            } else if levels > 15.0 {
                (levels / 15.0).ln()
            } else {
                0.0
            };
            if miss < best.0 {
                best = (miss, s);
            }
        }
    }
    best.1
}

/// Load, lay out, and write one PNG per selected dimension.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Vec<PathBuf>, PipelineError> {
    if !cfg.output.contains("{dim}") {
        return Err(PipelineError::Usage(format!(
            "output template '{}' must contain {{dim}}",
            cfg.output
        )));
    }
    cfg.render.validate()?;
    let prepared = Prepared::load(cfg)?;
    let dims = prepared.resolve_dims(&cfg.dims)?;
    let mut written = Vec::with_capacity(dims.len());
    for dim in &dims {
        let img = prepared.render(dim, &cfg.render)?;
        let path = cfg.output_path(dim);
        write_png(&img, &path)?;
        log::info!("wrote {}", path.display());
        written.push(path);
    }
    Ok(written)
}

fn write_png(img: &RenderedImage, path: &Path) -> Result<(), PipelineError> {
    let bytes = img.to_png()?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| PipelineError::Write {
            path: path.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, bytes).map_err(|source| PipelineError::Write {
        path: path.to_path_buf(),
        source,
    })
}
