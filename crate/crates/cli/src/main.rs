use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mdcontour::dataset::CsvOptions;
use mdcontour::field::MlsVariant;
use mdcontour::layout::LayoutOverrides;
use mdcontour::pipeline::{
    parse_dims, parse_resolution, run_pipeline, DimSelection, PipelineConfig, PipelineError, Prepared, RenderOptions,
    Spacing, DEFAULT_OUTPUT,
};
use mdcontour::render::{RenderMode, Texture};

/// Contour plots of multidimensional data over a relaxed, planarity-preserving projection.
///
/// Reads a numeric CSV, projects it with PCA, spreads crowded points with a
/// planarity-preserving layout, and writes one contour image per selected
/// column (or serves an interactive viewer with --serve).
#[derive(Debug, Parser)]
#[command(name = "mdcontour", version)]
struct Args {
    /// Input CSV with a header row; numeric columns become dimensions.
    #[arg(long, short)]
    input: PathBuf,

    /// `all`, or a comma-separated list of column names, `a:b` pairs and `@projection`.
    #[arg(long, default_value = "all", value_parser = parse_dims_arg)]
    dims: DimSelection,

    /// Interpolation variant: linear, mean, affine or rigid.
    #[arg(long, default_value = "affine")]
    variant: MlsVariant,

    /// Inverse-distance weight exponent (defaults: mean/rigid 1.0, affine 1.5).
    #[arg(long)]
    alpha: Option<f64>,

    /// Relaxation amount: 0 draws the plain projection, 1 the fully relaxed layout.
    #[arg(long, default_value_t = 1.0)]
    relax: f64,

    /// Render mode: contour, discrete, discrete+contour, adaptive, gradient or texture.
    #[arg(long, default_value = "contour")]
    mode: RenderMode,

    /// Contour interval in column units, or `auto`.
    #[arg(long, default_value = "auto")]
    spacing: Spacing,

    /// Output size as WIDTHxHEIGHT, at most 8192 per side.
    #[arg(long, default_value = "600x600", value_parser = parse_resolution)]
    resolution: (usize, usize),

    /// Layout iterations [default: 500].
    #[arg(long)]
    iterations: Option<usize>,

    /// Temperature decay per layout iteration, in (0, 1) [default: 0.99].
    #[arg(long)]
    lambda: Option<f64>,

    /// Initial layout temperature in projection units [default: the edge length].
    #[arg(long)]
    temp: Option<f64>,

    /// Desired edge length [default: median edge length of the triangulation].
    #[arg(long)]
    edge_length: Option<f64>,

    /// Seed for the jitter that separates duplicate points.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output path template; `{dim}` is replaced by the dimension label.
    #[arg(long, short, default_value = DEFAULT_OUTPUT)]
    output: String,

    /// Append a value legend to the right of each image.
    #[arg(long)]
    legend: bool,

    /// Image used by texture mode [default: a built-in checkerboard].
    #[arg(long)]
    texture: Option<PathBuf>,

    /// CSV field delimiter.
    #[arg(long, default_value_t = ',')]
    delimiter: char,

    /// Ignore columns containing non-numeric cells instead of failing.
    #[arg(long)]
    skip_non_numeric: bool,

    /// Serve the interactive viewer API on this address instead of writing images.
    #[arg(long, num_args = 0..=1, default_missing_value = "127.0.0.1:8080", value_name = "ADDR")]
    serve: Option<SocketAddr>,

    /// Directory of viewer files served at / together with --serve.
    #[arg(long, requires = "serve")]
    static_dir: Option<PathBuf>,
}

fn parse_dims_arg(s: &str) -> Result<DimSelection, String> {
    parse_dims(s).map_err(|e| e.to_string())
}

impl Args {
    fn config(&self) -> Result<PipelineConfig, PipelineError> {
        if !self.delimiter.is_ascii() {
            return Err(PipelineError::Usage(format!("delimiter '{}' is not ASCII", self.delimiter)));
        }
        let texture = match &self.texture {
            Some(p) => Some(
                Texture::load(p).map_err(|e| PipelineError::Usage(format!("texture {}: {e}", p.display())))?,
            ),
            None => None,
        };
        Ok(PipelineConfig {
            input: self.input.clone(),
            csv: CsvOptions {
                delimiter: self.delimiter as u8,
                skip_non_numeric: self.skip_non_numeric,
            },
            dims: self.dims.clone(),
            render: RenderOptions {
                variant: self.variant,
                alpha: self.alpha,
                relax: self.relax,
                mode: self.mode,
                spacing: self.spacing,
                width: self.resolution.0,
                height: self.resolution.1,
                legend: self.legend,
                texture,
            },
            layout: LayoutOverrides {
                iterations: self.iterations,
                lambda: self.lambda,
                temp: self.temp,
                edge_length: self.edge_length,
                ..LayoutOverrides::default()
            },
            seed: self.seed,
            output: self.output.clone(),
        })
    }
}

fn configure_threads() {
    let Ok(v) = std::env::var("MDCONTOUR_THREADS") else {
        return;
    };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size the worker pool: {e}");
            }
        }
        _ => log::warn!("ignoring MDCONTOUR_THREADS={v}: expected a positive integer"),
    }
}

fn fail(e: PipelineError) -> ExitCode {
    if e.is_usage() {
        eprintln!("error: {e}");
        ExitCode::from(2)
    } else {
        eprintln!("error [{}]: {e}", e.stage());
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    configure_threads();
    let cfg = match args.config() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };

    if let Some(addr) = args.serve {
        let prepared = match cfg.render.validate().and_then(|_| Prepared::load(&cfg)) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        if let Err(e) = prepared.resolve_dims(&cfg.dims) {
            return fail(e);
        }
        eprintln!("serving {} on http://{addr}", cfg.input.display());
        return match mdcontour_service::run_blocking(prepared, cfg.layout, cfg.render.texture, addr, args.static_dir) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error [serve]: {e}");
                ExitCode::from(1)
            }
        };
    }

    match run_pipeline(&cfg) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}
