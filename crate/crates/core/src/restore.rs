//! Image restoration from a triangle mesh.
//!
//! Every triangle owns a small interpolation system over the centroids of its
//! support triangles. Output pixels are mapped into the mesh frame, located,
//! and evaluated with the owning triangle's system. The piecewise and
//! vertex-based methods serve as baselines.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::cdt::{CdtError, Locator};
use crate::geometry::Point2;
use crate::image::GrayImage;
use crate::mesh::TriMesh;
use crate::rbf::{euclidean_dist2, Kernel, KernelKind, RbfError, RbfSystem};
use crate::tensor::{anisotropic_dist2, Metric, TensorField};

#[derive(Debug, Error, PartialEq)]
pub enum RestoreError {
    #[error("mesh has no triangle intensities")]
    MissingIntensities,
    #[error("method {0} needs a tensor field")]
    MissingTensor(Method),
    #[error("vertex method needs one value per vertex ({expected}), got {found}")]
    VertexValues { expected: usize, found: usize },
    #[error("tensor field is {found:?} but the mesh frame is {expected:?}")]
    TensorSize { expected: (usize, usize), found: (usize, usize) },
    #[error("scale must be at least 1")]
    InvalidScale,
    #[error("mesh has an empty frame")]
    EmptyFrame,
    #[error("unknown method {0:?}")]
    UnknownMethod(String),
    #[error("unknown support policy {0:?}")]
    UnknownSupport(String),
    #[error("unknown metric point {0:?}")]
    UnknownMetricPoint(String),
    #[error("unknown distance unit {0:?}")]
    UnknownDistanceUnit(String),
    #[error(transparent)]
    Locate(#[from] CdtError),
    #[error(transparent)]
    Rbf(#[from] RbfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Piecewise,
    VertexIsoRbf,
    TriangleIsoRbf,
    TriangleArbf,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Piecewise => "piecewise",
            Method::VertexIsoRbf => "vertex_iso_rbf",
            Method::TriangleIsoRbf => "triangle_iso_rbf",
            Method::TriangleArbf => "triangle_arbf",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = RestoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "piecewise" => Ok(Method::Piecewise),
            "vertex_iso_rbf" | "vertex" => Ok(Method::VertexIsoRbf),
            "triangle_iso_rbf" | "iso_rbf" | "iso" => Ok(Method::TriangleIsoRbf),
            "triangle_arbf" | "arbf" => Ok(Method::TriangleArbf),
            _ => Err(RestoreError::UnknownMethod(s.to_string())),
        }
    }
}

/// How the interpolation support of a triangle is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportPolicy {
    /// The triangle and every triangle sharing a vertex with it.
    OneRing,
    /// The `k` triangles with centroids nearest to the triangle's centroid.
    Nearest(usize),
}

impl fmt::Display for SupportPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupportPolicy::OneRing => f.write_str("one_ring"),
            SupportPolicy::Nearest(k) => write!(f, "knn:{k}"),
        }
    }
}

impl FromStr for SupportPolicy {
    type Err = RestoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        if lower == "one_ring" {
            return Ok(SupportPolicy::OneRing);
        }
        lower
            .strip_prefix("knn:")
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|&k| k >= 1)
            .map(SupportPolicy::Nearest)
            .ok_or_else(|| RestoreError::UnknownSupport(s.to_string()))
    }
}

/// Where the anisotropic metric is sampled when evaluating a pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricPoint {
    /// At the pixel being interpolated.
    Pixel,
    /// At the centroid of the pixel's triangle.
    Center,
}

impl fmt::Display for MetricPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricPoint::Pixel => "pixel",
            MetricPoint::Center => "center",
        })
    }
}

impl FromStr for MetricPoint {
    type Err = RestoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pixel" => Ok(MetricPoint::Pixel),
            "center" => Ok(MetricPoint::Center),
            _ => Err(RestoreError::UnknownMetricPoint(s.to_string())),
        }
    }
}

/// Length unit of the distances fed to the kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceUnit {
    Pixel,
    /// The mean center spacing of the mesh, see [`mean_center_spacing`].
    Spacing,
}

impl fmt::Display for DistanceUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceUnit::Pixel => "pixel",
            DistanceUnit::Spacing => "spacing",
        })
    }
}

impl FromStr for DistanceUnit {
    type Err = RestoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pixel" => Ok(DistanceUnit::Pixel),
            "spacing" => Ok(DistanceUnit::Spacing),
            _ => Err(RestoreError::UnknownDistanceUnit(s.to_string())),
        }
    }
}

/// Square root of the mean triangle area.
pub fn mean_center_spacing(mesh: &TriMesh) -> f64 {
    if mesh.triangles.is_empty() {
        return 1.0;
    }
    let area: f64 = (0..mesh.triangles.len())
        .map(|t| {
            let [a, b, c] = mesh.triangle_points(t);
            0.5 * ((b - a).x * (c - a).y - (b - a).y * (c - a).x).abs()
        })
        .sum();
    (area / mesh.triangles.len() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestoreConfig {
    pub method: Method,
    pub kernel: Kernel,
    pub scale: usize,
    pub support: SupportPolicy,
    pub metric_point: MetricPoint,
    pub distance_unit: DistanceUnit,
    pub parallel: bool,
}

impl Default for RestoreConfig {
    fn default() -> Self {
        Self {
            method: Method::TriangleArbf,
            kernel: Kernel::with_default_shape(KernelKind::Multiquadric),
            scale: 1,
            support: SupportPolicy::OneRing,
            metric_point: MetricPoint::Center,
            distance_unit: DistanceUnit::Spacing,
            parallel: false,
        }
    }
}

/// The triangles whose centers interpolate pixels inside `triangle`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighborhood {
    pub triangle: usize,
    pub support: Vec<usize>,
}

fn vertex_incidence(mesh: &TriMesh) -> Vec<Vec<usize>> {
    let mut inc = vec![Vec::new(); mesh.vertices.len()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for &v in tri {
            inc[v].push(t);
        }
    }
    inc
}

/// One-ring supports by shared vertex, ascending.
pub fn find_neighbors(mesh: &TriMesh) -> Vec<Neighborhood> {
    let inc = vertex_incidence(mesh);
    (0..mesh.triangles.len())
        .map(|t| {
            let set: BTreeSet<usize> = mesh.triangles[t].iter().flat_map(|&v| inc[v].iter().copied()).collect();
            Neighborhood { triangle: t, support: set.into_iter().collect() }
        })
        .collect()
}

/// The `k` nearest centroids (ties by index), found by growing vertex rings.
pub fn find_nearest_neighbors(mesh: &TriMesh, k: usize) -> Vec<Neighborhood> {
    let inc = vertex_incidence(mesh);
    let n = mesh.triangles.len();
    let k = k.clamp(1, n.max(1));
    (0..n)
        .map(|t| {
            let mut set: BTreeSet<usize> = BTreeSet::from([t]);
            let mut frontier = vec![t];
            // two extra rings beyond k candidates keep the selection close to exact
            let mut extra = 0;
            while !frontier.is_empty() && extra < 2 {
                if set.len() >= k {
                    extra += 1;
                }
                let mut next = Vec::new();
                for &f in &frontier {
                    for &v in &mesh.triangles[f] {
                        for &u in &inc[v] {
                            if set.insert(u) {
                                next.push(u);
                            }
                        }
                    }
                }
                frontier = next;
            }
            let c = mesh.centers[t];
            let mut cand: Vec<usize> = set.into_iter().collect();
            cand.sort_by(|&a, &b| c.dist2(mesh.centers[a]).total_cmp(&c.dist2(mesh.centers[b])).then(a.cmp(&b)));
            cand.truncate(k);
            cand.sort_unstable();
            Neighborhood { triangle: t, support: cand }
        })
        .collect()
}

pub fn neighborhoods(mesh: &TriMesh, policy: SupportPolicy) -> Vec<Neighborhood> {
    match policy {
        SupportPolicy::OneRing => find_neighbors(mesh),
        SupportPolicy::Nearest(k) => find_nearest_neighbors(mesh, k),
    }
}

/// Mean source intensity per triangle over the pixel centers it owns;
/// triangles owning no pixel center take a bilinear sample at the centroid.
pub fn center_intensities(img: &GrayImage, mesh: &TriMesh) -> Result<Vec<f64>, RestoreError> {
    let n = mesh.triangles.len();
    let mut sum = vec![0.0; n];
    let mut count = vec![0usize; n];
    let map = pixel_triangles(mesh, img.width(), img.height(), 1, false)?;
    for (i, &t) in map.iter().enumerate() {
        sum[t] += img.data()[i];
        count[t] += 1;
    }
    Ok((0..n)
        .map(
            |t| {
                if count[t] > 0 {
                    sum[t] / count[t] as f64
                } else {
                    img.bilinear(mesh.centers[t].x, mesh.centers[t].y)
                }
            },
        )
        .collect())
}

/// Bilinear samples of the source at the mesh vertices.
pub fn vertex_intensities(img: &GrayImage, mesh: &TriMesh) -> Vec<f64> {
    mesh.vertices.iter().map(|p| img.bilinear(p.x, p.y)).collect()
}

/// Position in the mesh frame of output pixel `(u, v)` at integer `scale`.
#[inline]
pub fn output_to_mesh(u: usize, v: usize, scale: usize, width: usize, height: usize) -> Point2 {
    let s = scale as f64;
    let x = ((u as f64 + 0.5) / s - 0.5).clamp(0.0, width.saturating_sub(1) as f64);
    let y = ((v as f64 + 0.5) / s - 0.5).clamp(0.0, height.saturating_sub(1) as f64);
    Point2::new(x, y)
}

fn locate_row(loc: &Locator, v: usize, out_w: usize, scale: usize, w: usize, h: usize) -> Result<Vec<usize>, CdtError> {
    let mut hint = 0;
    let mut row = Vec::with_capacity(out_w);
    for u in 0..out_w {
        let t = loc.locate_from(output_to_mesh(u, v, scale, w, h), hint)?;
        hint = t;
        row.push(t);
    }
    Ok(row)
}

/// Owning triangle of every output pixel, row-major, for an output of
/// `scale` times the `width × height` frame.
pub fn pixel_triangles(
    mesh: &TriMesh,
    width: usize,
    height: usize,
    scale: usize,
    parallel: bool,
) -> Result<Vec<usize>, RestoreError> {
    if scale == 0 {
        return Err(RestoreError::InvalidScale);
    }
    let loc = Locator::new(mesh);
    let (ow, oh) = (width * scale, height * scale);
    let rows: Result<Vec<Vec<usize>>, CdtError> = if parallel {
        (0..oh).into_par_iter().map(|v| locate_row(&loc, v, ow, scale, width, height)).collect()
    } else {
        (0..oh).map(|v| locate_row(&loc, v, ow, scale, width, height)).collect()
    };
    Ok(rows?.concat())
}

/// Counters reported alongside a restoration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RestoreStats {
    pub triangles: usize,
    pub solves: usize,
    pub regularized_systems: usize,
    pub fallback_triangles: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Restored {
    /// Real-valued output clamped to `[0, 255]`.
    pub image: GrayImage,
    pub stats: RestoreStats,
}

enum Local {
    Flat(f64),
    System(RbfSystem),
}

fn check_tensor(mesh: &TriMesh, tensor: Option<&TensorField>, method: Method) -> Result<(), RestoreError> {
    let field = tensor.ok_or(RestoreError::MissingTensor(method))?;
    if (field.width(), field.height()) != (mesh.width, mesh.height) {
        return Err(RestoreError::TensorSize {
            expected: (mesh.width, mesh.height),
            found: (field.width(), field.height()),
        });
    }
    Ok(())
}

fn solve_triangle_systems(
    mesh: &TriMesh,
    hoods: &[Neighborhood],
    tensor: Option<&TensorField>,
    cfg: &RestoreConfig,
    inv_unit2: f64,
) -> (Vec<Local>, RestoreStats) {
    let solve_one = |hood: &Neighborhood| -> Result<RbfSystem, RbfError> {
        let centers: Vec<Point2> = hood.support.iter().map(|&s| mesh.centers[s]).collect();
        let values: Vec<f64> = hood.support.iter().map(|&s| mesh.center_intensity[s]).collect();
        match (cfg.method, tensor) {
            (Method::TriangleArbf, Some(field)) => {
                let m = field.at(mesh.centers[hood.triangle]);
                RbfSystem::solve(centers, values, cfg.kernel, |a, b| anisotropic_dist2(a, b, &m) * inv_unit2)
            }
            _ => RbfSystem::solve(centers, values, cfg.kernel, |a, b| euclidean_dist2(a, b) * inv_unit2),
        }
    };
    let solved: Vec<Result<RbfSystem, RbfError>> =
        if cfg.parallel { hoods.par_iter().map(solve_one).collect() } else { hoods.iter().map(solve_one).collect() };
    let mut stats = RestoreStats { triangles: mesh.triangles.len(), solves: solved.len(), ..Default::default() };
    let locals = solved
        .into_iter()
        .enumerate()
        .map(|(t, r)| match r {
            Ok(sys) => {
                if sys.is_regularized() {
                    stats.regularized_systems += 1;
                }
                Local::System(sys)
            }
            Err(_) => {
                stats.fallback_triangles += 1;
                Local::Flat(mesh.center_intensity[t])
            }
        })
        .collect();
    (locals, stats)
}

fn solve_vertex_systems(mesh: &TriMesh, values: &[f64], kernel: Kernel, inv_unit2: f64) -> (Vec<Local>, RestoreStats) {
    let mut stats =
        RestoreStats { triangles: mesh.triangles.len(), solves: mesh.triangles.len(), ..Default::default() };
    let locals = mesh
        .triangles
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let centers = tri.iter().map(|&v| mesh.vertices[v]).collect();
            let vals = tri.iter().map(|&v| values[v]).collect();
            match RbfSystem::solve(centers, vals, kernel, |a, b| euclidean_dist2(a, b) * inv_unit2) {
                Ok(sys) => {
                    if sys.is_regularized() {
                        stats.regularized_systems += 1;
                    }
                    Local::System(sys)
                }
                Err(_) => {
                    stats.fallback_triangles += 1;
                    Local::Flat(mesh.center_intensity[t])
                }
            }
        })
        .collect();
    (locals, stats)
}

/// Restores the image encoded by `mesh`.
///
/// `tensor` is required for the anisotropic method and must match the mesh
/// frame; `vertex_values` is required for the vertex baseline.
pub fn restore(
    mesh: &TriMesh,
    tensor: Option<&TensorField>,
    vertex_values: Option<&[f64]>,
    cfg: &RestoreConfig,
) -> Result<Restored, RestoreError> {
    if !mesh.has_intensities() {
        return Err(RestoreError::MissingIntensities);
    }
    if cfg.scale == 0 {
        return Err(RestoreError::InvalidScale);
    }
    if mesh.width == 0 || mesh.height == 0 {
        return Err(RestoreError::EmptyFrame);
    }
    let (w, h, s) = (mesh.width, mesh.height, cfg.scale);
    let inv_unit2 = match cfg.distance_unit {
        DistanceUnit::Pixel => 1.0,
        DistanceUnit::Spacing => mean_center_spacing(mesh).powi(-2),
    };
    let (locals, stats) = match cfg.method {
        Method::Piecewise => {
            let locals = mesh.center_intensity.iter().map(|&v| Local::Flat(v)).collect();
            (locals, RestoreStats { triangles: mesh.triangles.len(), ..Default::default() })
        }
        Method::VertexIsoRbf => {
            let values = vertex_values.ok_or(RestoreError::VertexValues { expected: mesh.vertices.len(), found: 0 })?;
            if values.len() != mesh.vertices.len() {
                return Err(RestoreError::VertexValues { expected: mesh.vertices.len(), found: values.len() });
            }
            solve_vertex_systems(mesh, values, cfg.kernel, inv_unit2)
        }
        Method::TriangleIsoRbf => solve_triangle_systems(mesh, &neighborhoods(mesh, cfg.support), None, cfg, inv_unit2),
        Method::TriangleArbf => {
            check_tensor(mesh, tensor, cfg.method)?;
            solve_triangle_systems(mesh, &neighborhoods(mesh, cfg.support), tensor, cfg, inv_unit2)
        }
    };
    let owner = pixel_triangles(mesh, w, h, s, cfg.parallel)?;
    let arbf_field = if cfg.method == Method::TriangleArbf { tensor } else { None };
    let (ow, oh) = (w * s, h * s);

    let eval_row = |v: usize, row: &mut [f64]| {
        for (u, out) in row.iter_mut().enumerate() {
            let t = owner[v * ow + u];
            let value = match &locals[t] {
                Local::Flat(val) => *val,
                Local::System(sys) => {
                    let p = output_to_mesh(u, v, s, w, h);
                    match arbf_field {
                        Some(field) => {
                            let m: Metric = match cfg.metric_point {
                                MetricPoint::Pixel => field.at(p),
                                MetricPoint::Center => field.at(mesh.centers[t]),
                            };
                            sys.evaluate(p, |a, b| anisotropic_dist2(a, b, &m) * inv_unit2)
                        }
                        None => sys.evaluate(p, |a, b| euclidean_dist2(a, b) * inv_unit2),
                    }
                }
            };
            *out = value;
        }
    };
    let mut data = vec![0.0; ow * oh];
    if cfg.parallel {
        data.par_chunks_mut(ow).enumerate().for_each(|(v, row)| eval_row(v, row));
    } else {
        data.chunks_mut(ow).enumerate().for_each(|(v, row)| eval_row(v, row));
    }
    for x in &mut data {
        *x = if x.is_nan() { 0.0 } else { x.clamp(0.0, 255.0) };
    }
    let image = GrayImage::new(ow, oh, data).expect("output size matches buffer");
    Ok(Restored { image, stats })
}
