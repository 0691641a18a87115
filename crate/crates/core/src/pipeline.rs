//! End-to-end encode and decode.

use thiserror::Error;

use crate::cdt::{Cdt, CdtError};
use crate::image::GrayImage;
use crate::mesh::TriMesh;
use crate::restore::{center_intensities, restore, vertex_intensities, Method, RestoreConfig, RestoreError, Restored};
use crate::sampling::{build_samples, SamplePointSet, SamplingConfig};
use crate::tensor::{TensorField, TensorParams};

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("image has no pixels")]
    EmptyImage,
    #[error("triangulation: {0}")]
    Triangulate(CdtError),
    #[error("center intensities: {0}")]
    Intensities(RestoreError),
    #[error("restore: {0}")]
    Restore(RestoreError),
    #[error("tensor source is {found:?} but the mesh frame is {expected:?}")]
    TensorSource { expected: (usize, usize), found: (usize, usize) },
    #[error("method {0} needs the source image")]
    NeedsSource(Method),
}

/// Result of encoding one image.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub mesh: TriMesh,
    pub samples: SamplePointSet,
    /// Chain segments dropped because they crossed an earlier constraint.
    pub skipped_constraints: usize,
}

/// Samples, triangulates with edge constraints, and stores the mean intensity
/// of every triangle.
pub fn encode(img: &GrayImage, cfg: &SamplingConfig) -> Result<Encoded, PipelineError> {
    if img.is_empty() {
        return Err(PipelineError::EmptyImage);
    }
    let samples = build_samples(img, cfg);
    let mut cdt = Cdt::new(&samples.positions()).map_err(PipelineError::Triangulate)?;
    let mut skipped = 0;
    for [a, b] in samples.constraint_segments() {
        match cdt.insert_constraint(a, b) {
            Ok(()) => {}
            Err(CdtError::ConstraintsIntersect { .. }) => skipped += 1,
            Err(e) => return Err(PipelineError::Triangulate(e)),
        }
    }
    let mesh = cdt.to_mesh(img.width(), img.height()).map_err(PipelineError::Triangulate)?;
    let values = center_intensities(img, &mesh).map_err(PipelineError::Intensities)?;
    let mesh = mesh.with_intensities(values).expect("one value per triangle");
    Ok(Encoded { mesh, samples, skipped_constraints: skipped })
}

/// Where the anisotropic metric comes from at decode time.
#[derive(Debug, Clone, Copy)]
pub enum TensorSource<'a> {
    /// Tensors of the original image.
    Original(&'a GrayImage),
    /// Tensors of a piecewise-constant decode of the mesh itself.
    Predecode,
}

/// Structure tensor field of the piecewise-constant rendering of `mesh`.
pub fn predecode_tensor(mesh: &TriMesh, params: &TensorParams) -> Result<TensorField, PipelineError> {
    let cfg = RestoreConfig { method: Method::Piecewise, scale: 1, ..RestoreConfig::default() };
    let flat = restore(mesh, None, None, &cfg).map_err(PipelineError::Restore)?;
    Ok(TensorField::from_image(&flat.image, params))
}

/// Decodes `mesh`. `source`, when given, supplies vertex values for the vertex
/// baseline and, with [`TensorSource::Original`], the tensors.
pub fn decode(
    mesh: &TriMesh,
    cfg: &RestoreConfig,
    tensor_params: &TensorParams,
    tensor_source: TensorSource<'_>,
    source: Option<&GrayImage>,
) -> Result<Restored, PipelineError> {
    let field = if cfg.method == Method::TriangleArbf {
        Some(match tensor_source {
            TensorSource::Original(img) => {
                if (img.width(), img.height()) != (mesh.width, mesh.height) {
                    return Err(PipelineError::TensorSource {
                        expected: (mesh.width, mesh.height),
                        found: (img.width(), img.height()),
                    });
                }
                TensorField::from_image(img, tensor_params)
            }
            TensorSource::Predecode => predecode_tensor(mesh, tensor_params)?,
        })
    } else {
        None
    };
    let vertex_values = if cfg.method == Method::VertexIsoRbf {
        let img = source.ok_or(PipelineError::NeedsSource(cfg.method))?;
        Some(vertex_intensities(img, mesh))
    } else {
        None
    };
    restore(mesh, field.as_ref(), vertex_values.as_deref(), cfg).map_err(PipelineError::Restore)
}
