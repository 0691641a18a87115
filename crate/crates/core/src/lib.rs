//! Feature-adaptive triangular mesh coding of grayscale images.
//!
//! The encoder places samples on Canny edges, halftone dots and a uniform
//! fill, builds a constrained Delaunay triangulation and stores one mean
//! intensity per triangle. The decoder restores pixels with local radial
//! basis function interpolation over triangle centers, optionally under an
//! anisotropic metric taken from the image structure tensor.

pub mod cdt;
pub mod config;
mod filter;
pub mod geometry;
pub mod image;
pub mod mesh;
pub mod metrics;
pub mod pipeline;
pub mod rbf;
pub mod restore;
pub mod sampling;
pub mod tensor;

pub use crate::cdt::{constrain, delaunay, locate, CdtError, Constraint, Locator};
pub use crate::config::{CodecConfig, ConfigError};
pub use crate::geometry::Point2;
pub use crate::image::{load_image, save_image, GrayImage, ImageError};
pub use crate::mesh::{load_mesh, save_mesh, MeshError, TriMesh};
pub use crate::metrics::{psnr, rmse, QualityReport};
pub use crate::pipeline::{decode, encode, Encoded, PipelineError, TensorSource};
pub use crate::rbf::{Kernel, KernelKind, RbfError, RbfSystem};
pub use crate::restore::{DistanceUnit, Method, MetricPoint, RestoreConfig, RestoreError, Restored, SupportPolicy};
pub use crate::sampling::{build_samples, SamplePointSet, SamplingConfig};
pub use crate::tensor::{TensorField, TensorParams};
