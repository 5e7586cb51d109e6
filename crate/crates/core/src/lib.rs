//! Fixed-point 2D plots of multidimensional data.
//!
//! The pipeline projects a table onto its two principal axes, triangulates the
//! projected points, relaxes the triangulation with a force-directed layout
//! that can never flip a triangle, and finally fills the space between the
//! moved points with a moving-least-squares field that maps every pixel back
//! to either the undistorted projection or the values of selected columns.
//! That field is drawn as isocontours, color bands, gradients or textures.
//!
//! ```no_run
//! use mdcontour::pipeline::{run_pipeline, PipelineConfig};
//!
//! let cfg = PipelineConfig::new("cars.csv");
//! let written = run_pipeline(&cfg).unwrap();
//! println!("{written:?}");
//! ```

pub mod dataset;
pub mod field;
pub mod geom;
pub mod layout;
pub mod mesh;
pub mod pipeline;
pub mod projection;
pub mod render;

pub use dataset::{CsvOptions, Dataset, DatasetError};
pub use field::{CoordinateField, MlsParams, MlsVariant, TargetAssignment, ViewportTransform};
pub use geom::Vec2;
pub use layout::{LayoutParams, LayoutState};
pub use mesh::{MeshError, TriMesh};
pub use projection::{PointCloud2D, ProjectionModel};
pub use render::{RenderMode, RenderSpec, RenderedImage};
