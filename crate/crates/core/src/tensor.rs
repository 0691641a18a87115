//! Structure tensor and the anisotropic metric derived from it.
//!
//! The smoothed structure tensor is decomposed per pixel into an edge normal
//! `e1` and tangent `e2`. Its eigenvalues are conditioned to
//! `1 + kappa * l1 / (l1 + l2 + eps)` along the normal and `1` along the
//! tangent, so flat regions get the identity metric and distances across
//! edges are stretched by up to `1 + kappa`.

use crate::filter::gaussian_blur;
use crate::geometry::Point2;
use crate::image::{bilinear_sample, GrayImage};

const EIGEN_EPS: f64 = 1e-8;

/// Structure tensor parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorParams {
    pub sigma: f64,
    pub kappa: f64,
}

impl Default for TensorParams {
    fn default() -> Self {
        Self { sigma: 1.5, kappa: 5.0 }
    }
}

/// Symmetric 2×2 metric `[[t11, t12], [t12, t22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric {
    pub t11: f64,
    pub t12: f64,
    pub t22: f64,
}

impl Metric {
    pub const IDENTITY: Metric = Metric { t11: 1.0, t12: 0.0, t22: 1.0 };

    /// `d^T T d` for the displacement `d`.
    #[inline]
    pub fn quad(&self, dx: f64, dy: f64) -> f64 {
        self.t11 * dx * dx + 2.0 * self.t12 * dx * dy + self.t22 * dy * dy
    }

    pub fn det(&self) -> f64 {
        self.t11 * self.t22 - self.t12 * self.t12
    }

    pub fn is_spd(&self) -> bool {
        self.t11 > 0.0 && self.t22 > 0.0 && self.det() > 0.0
    }
}

/// Squared anisotropic distance `(p - q)^T T (p - q)`.
#[inline]
pub fn anisotropic_dist2(p: Point2, q: Point2, metric: &Metric) -> f64 {
    metric.quad(p.x - q.x, p.y - q.y)
}

/// Eigen-decomposition of a symmetric 2×2 matrix, `l1 >= l2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen {
    pub l1: f64,
    pub l2: f64,
    /// Unit eigenvector of `l1` (the edge normal).
    pub e1: Point2,
    /// Unit eigenvector of `l2` (the edge tangent).
    pub e2: Point2,
}

pub fn eigen_sym(s11: f64, s12: f64, s22: f64) -> Eigen {
    let mean = 0.5 * (s11 + s22);
    let half = 0.5 * (s11 - s22);
    let r = half.hypot(s12);
    let theta = 0.5 * (2.0 * s12).atan2(s11 - s22);
    let (sin, cos) = theta.sin_cos();
    Eigen { l1: mean + r, l2: mean - r, e1: Point2::new(cos, sin), e2: Point2::new(-sin, cos) }
}

/// Conditioned metric for a raw structure tensor.
pub fn condition(s11: f64, s12: f64, s22: f64, kappa: f64) -> Metric {
    let e = eigen_sym(s11, s12, s22);
    let l1 = e.l1.max(0.0);
    let l2 = e.l2.max(0.0);
    let stretch = kappa * l1 / (l1 + l2 + EIGEN_EPS);
    let (nx, ny) = (e.e1.x, e.e1.y);
    Metric { t11: 1.0 + stretch * nx * nx, t12: stretch * nx * ny, t22: 1.0 + stretch * ny * ny }
}

/// Image gradient by central differences, one-sided at the borders.
pub fn gradient(img: &GrayImage) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = (img.width(), img.height());
    let d = img.data();
    let mut gx = vec![0.0; d.len()];
    let mut gy = vec![0.0; d.len()];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            gx[i] = if w < 2 {
                0.0
            } else if x == 0 {
                d[i + 1] - d[i]
            } else if x == w - 1 {
                d[i] - d[i - 1]
            } else {
                0.5 * (d[i + 1] - d[i - 1])
            };
            gy[i] = if h < 2 {
                0.0
            } else if y == 0 {
                d[i + w] - d[i]
            } else if y == h - 1 {
                d[i] - d[i - w]
            } else {
                0.5 * (d[i + w] - d[i - w])
            };
        }
    }
    (gx, gy)
}

/// Per-pixel raw structure tensor channels.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureTensor {
    pub width: usize,
    pub height: usize,
    pub s11: Vec<f64>,
    pub s12: Vec<f64>,
    pub s22: Vec<f64>,
}

pub fn structure_tensor(img: &GrayImage, sigma: f64) -> StructureTensor {
    let (w, h) = (img.width(), img.height());
    let (gx, gy) = gradient(img);
    let xx: Vec<f64> = gx.iter().map(|g| g * g).collect();
    let xy: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a * b).collect();
    let yy: Vec<f64> = gy.iter().map(|g| g * g).collect();
    StructureTensor {
        width: w,
        height: h,
        s11: gaussian_blur(&xx, w, h, sigma),
        s12: gaussian_blur(&xy, w, h, sigma),
        s22: gaussian_blur(&yy, w, h, sigma),
    }
}

/// Per-pixel conditioned metric field.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    width: usize,
    height: usize,
    t11: Vec<f64>,
    t12: Vec<f64>,
    t22: Vec<f64>,
}

impl TensorField {
    pub fn from_image(img: &GrayImage, params: &TensorParams) -> Self {
        let st = structure_tensor(img, params.sigma);
        let n = st.s11.len();
        let mut field = Self {
            width: st.width,
            height: st.height,
            t11: Vec::with_capacity(n),
            t12: Vec::with_capacity(n),
            t22: Vec::with_capacity(n),
        };
        for i in 0..n {
            let m = condition(st.s11[i], st.s12[i], st.s22[i], params.kappa);
            field.t11.push(m.t11);
            field.t12.push(m.t12);
            field.t22.push(m.t22);
        }
        field
    }

    /// The identity metric everywhere.
    pub fn identity(width: usize, height: usize) -> Self {
        let n = width * height;
        Self { width, height, t11: vec![1.0; n], t12: vec![0.0; n], t22: vec![1.0; n] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn at_pixel(&self, x: usize, y: usize) -> Metric {
        let i = y * self.width + x;
        Metric { t11: self.t11[i], t12: self.t12[i], t22: self.t22[i] }
    }

    /// Metric at a real position, bilinear in the tensor entries.
    pub fn at(&self, p: Point2) -> Metric {
        let (w, h) = (self.width, self.height);
        Metric {
            t11: bilinear_sample(&self.t11, w, h, p.x, p.y),
            t12: bilinear_sample(&self.t12, w, h, p.x, p.y),
            t22: bilinear_sample(&self.t22, w, h, p.x, p.y),
        }
    }
}
