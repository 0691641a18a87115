//! Restoration quality metrics.

use std::fmt;

use thiserror::Error;

use crate::image::GrayImage;
use crate::mesh::{mesh_to_string, TriMesh};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("image sizes differ: {0}x{1} vs {2}x{3}")]
    SizeMismatch(usize, usize, usize, usize),
}

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

fn check_size(a: &GrayImage, b: &GrayImage) -> Result<(), MetricsError> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(MetricsError::SizeMismatch(a.width(), a.height(), b.width(), b.height()));
    }
    Ok(())
}

/// Root-mean-square difference.
pub fn rmse(a: &GrayImage, b: &GrayImage) -> Result<f64, MetricsError> {
    check_size(a, b)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    let mut acc = CompensatedSum::default();
    for (x, y) in a.data().iter().zip(b.data()) {
        let d = x - y;
        acc.add(d * d);
    }
    Ok((acc.total() / a.len() as f64).sqrt())
}

/// Peak signal-to-noise ratio in dB for an 8-bit peak; infinite when the
/// images are identical.
pub fn psnr_from_rmse(rmse: f64) -> f64 {
    if rmse == 0.0 {
        f64::INFINITY
    } else {
        20.0 * (255.0 / rmse).log10()
    }
}

pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64, MetricsError> {
    rmse(a, b).map(psnr_from_rmse)
}

/// Formats a dB value, printing `inf` for identical images.
pub fn format_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.4}")
    }
}

/// Mesh vertices per source pixel.
pub fn compression_ratio(mesh: &TriMesh, img: &GrayImage) -> f64 {
    vertex_ratio(mesh.vertices.len(), img.width(), img.height())
}

pub fn vertex_ratio(vertices: usize, width: usize, height: usize) -> f64 {
    vertices as f64 / (width * height) as f64
}

/// Size of the serialized mesh file, the actual stored payload.
pub fn payload_bytes(mesh: &TriMesh) -> usize {
    mesh_to_string(mesh).len()
}

/// RMSE and PSNR against the quantized output and against the real-valued
/// output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quality {
    pub rmse: f64,
    pub psnr_db: f64,
    pub rmse_unquantized: f64,
    pub psnr_db_unquantized: f64,
}

pub fn quality(original: &GrayImage, restored: &GrayImage) -> Result<Quality, MetricsError> {
    let q = restored.quantized();
    let rmse_q = rmse(original, &q)?;
    let rmse_r = rmse(original, restored)?;
    Ok(Quality {
        rmse: rmse_q,
        psnr_db: psnr_from_rmse(rmse_q),
        rmse_unquantized: rmse_r,
        psnr_db_unquantized: psnr_from_rmse(rmse_r),
    })
}

/// One evaluated restoration.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub image: String,
    pub method: String,
    pub kernel: String,
    pub shape_c: f64,
    pub compression_ratio: f64,
    pub quality: Quality,
    pub wall_time_seconds: f64,
    pub regularized_systems: usize,
    pub fallback_triangles: usize,
    pub payload_bytes: usize,
    /// `key=value` configuration overrides in effect for this run.
    pub overrides: Vec<String>,
}

impl QualityReport {
    pub const CSV_HEADER: &'static str =
        "image,method,kernel,c,ratio,psnr_db,rmse,time_s,regularized_systems,fallback_triangles";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{},{:.6},{:.4},{},{}",
            self.image,
            self.method,
            self.kernel,
            self.shape_c,
            self.compression_ratio,
            format_db(self.quality.psnr_db),
            self.quality.rmse,
            self.wall_time_seconds,
            self.regularized_systems,
            self.fallback_triangles
        )
    }
}

impl fmt::Display for QualityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "image={} method={} kernel={} c={} ratio={:.6} psnr_db={} rmse={:.6} psnr_db_unquantized={} \
             rmse_unquantized={:.6} time_s={:.4} regularized_systems={} fallback_triangles={} payload_bytes={}",
            self.image,
            self.method,
            self.kernel,
            self.shape_c,
            self.compression_ratio,
            format_db(self.quality.psnr_db),
            self.quality.rmse,
            format_db(self.quality.psnr_db_unquantized),
            self.quality.rmse_unquantized,
            self.wall_time_seconds,
            self.regularized_systems,
            self.fallback_triangles,
            self.payload_bytes
        )?;
        for o in &self.overrides {
            write!(f, " set:{o}")?;
        }
        Ok(())
    }
}
