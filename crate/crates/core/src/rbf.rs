//! Radial basis kernels and small dense interpolation systems.
//!
//! Kernels are evaluated on squared distances so that isotropic and
//! anisotropic metrics share one code path.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::Point2;

/// Pivot ratio below which a factorization counts as near-singular.
pub const PIVOT_RATIO_LIMIT: f64 = 1e-12;
/// Tikhonov weight relative to the mean diagonal entry.
pub const TIKHONOV_SCALE: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum RbfError {
    #[error("unknown kernel {0:?} (expected gaussian, mq, imq or tps)")]
    UnknownKernel(String),
    #[error("shape parameter must be positive and finite, got {0}")]
    InvalidShape(f64),
    #[error("system is empty")]
    Empty,
    #[error("{centers} centers but {values} values")]
    LengthMismatch { centers: usize, values: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is singular even after regularization")]
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Gaussian,
    Multiquadric,
    InverseMultiquadric,
    ThinPlate,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] =
        [KernelKind::Gaussian, KernelKind::Multiquadric, KernelKind::InverseMultiquadric, KernelKind::ThinPlate];

    /// Default shape parameter for this kernel.
    pub fn default_shape(self) -> f64 {
        match self {
            KernelKind::InverseMultiquadric => 1.8,
            _ => 0.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Gaussian => "gaussian",
            KernelKind::Multiquadric => "mq",
            KernelKind::InverseMultiquadric => "imq",
            KernelKind::ThinPlate => "tps",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = RbfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "ga" => Ok(KernelKind::Gaussian),
            "mq" | "multiquadric" => Ok(KernelKind::Multiquadric),
            "imq" | "inverse_multiquadric" => Ok(KernelKind::InverseMultiquadric),
            "tps" | "thin_plate" => Ok(KernelKind::ThinPlate),
            _ => Err(RbfError::UnknownKernel(s.to_string())),
        }
    }
}

/// A radial kernel with its shape parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    kind: KernelKind,
    c: f64,
}

impl Kernel {
    pub fn new(kind: KernelKind, c: f64) -> Result<Self, RbfError> {
        if !(c.is_finite() && c > 0.0) {
            return Err(RbfError::InvalidShape(c));
        }
        Ok(Self { kind, c })
    }

    pub fn with_default_shape(kind: KernelKind) -> Self {
        Self { kind, c: kind.default_shape() }
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn shape(&self) -> f64 {
        self.c
    }

    /// Kernel value at squared distance `r2`.
    #[inline]
    pub fn eval(&self, r2: f64) -> f64 {
        let c2 = self.c * self.c;
        match self.kind {
            KernelKind::Gaussian => (-c2 * r2).exp(),
            KernelKind::Multiquadric => (r2 + c2).sqrt(),
            KernelKind::InverseMultiquadric => 1.0 / (r2 + c2).sqrt(),
            KernelKind::ThinPlate => {
                if r2 > 0.0 {
                    0.5 * r2 * r2.ln()
                } else {
                    0.0
                }
            }
        }
    }
}

/// Row-major `n × n` kernel matrix `A[j][i] = phi(dist2(x_j, x_i))`.
pub fn assemble(centers: &[Point2], kernel: &Kernel, dist2: impl Fn(Point2, Point2) -> f64) -> Vec<f64> {
    let n = centers.len();
    let mut a = vec![0.0; n * n];
    for j in 0..n {
        for i in j..n {
            let v = kernel.eval(dist2(centers[j], centers[i]));
            a[j * n + i] = v;
            a[i * n + j] = v;
        }
    }
    a
}

/// Solved weights and whether regularization was needed.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub weights: Vec<f64>,
    pub regularized: bool,
}

/// In-place LU with partial pivoting. Returns the pivot permutation and the
/// ratio of smallest to largest pivot magnitude (0 for an exactly singular
/// matrix).
fn lu_factor(a: &mut [f64], n: usize) -> (Vec<usize>, f64) {
    let mut perm: Vec<usize> = (0..n).collect();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].abs();
        for r in k + 1..n {
            let v = a[r * n + k].abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        lo = lo.min(best);
        hi = hi.max(best);
        if best == 0.0 {
            return (perm, 0.0);
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            perm.swap(k, p);
        }
        let pivot = a[k * n + k];
        for r in k + 1..n {
            let factor = a[r * n + k] / pivot;
            a[r * n + k] = factor;
            if factor != 0.0 {
                for c in k + 1..n {
                    a[r * n + c] -= factor * a[k * n + c];
                }
            }
        }
    }
    (perm, if hi > 0.0 { lo / hi } else { 0.0 })
}

fn lu_solve(lu: &[f64], n: usize, perm: &[usize], f: &[f64]) -> Vec<f64> {
    let mut x: Vec<f64> = perm.iter().map(|&p| f[p]).collect();
    for r in 0..n {
        let mut acc = x[r];
        for c in 0..r {
            acc -= lu[r * n + c] * x[c];
        }
        x[r] = acc;
    }
    for r in (0..n).rev() {
        let mut acc = x[r];
        for c in r + 1..n {
            acc -= lu[r * n + c] * x[c];
        }
        x[r] = acc / lu[r * n + r];
    }
    x
}

/// Solves `A w = f`, falling back to `(A + mu I) w = f` when the pivots
/// indicate near-singularity.
pub fn solve(a: &[f64], f: &[f64]) -> Result<Solution, RbfError> {
    let n = f.len();
    if n == 0 {
        return Err(RbfError::Empty);
    }
    if a.len() != n * n {
        return Err(RbfError::LengthMismatch { centers: (a.len() as f64).sqrt() as usize, values: n });
    }
    if a.iter().chain(f).any(|v| !v.is_finite()) {
        return Err(RbfError::NonFinite);
    }
    let mut lu = a.to_vec();
    let (perm, ratio) = lu_factor(&mut lu, n);
    if ratio >= PIVOT_RATIO_LIMIT {
        return Ok(Solution { weights: lu_solve(&lu, n, &perm, f), regularized: false });
    }
    let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
    let scale = if trace != 0.0 { trace.abs() / n as f64 } else { a.iter().fold(0.0f64, |m, v| m.max(v.abs())) };
    let mu = TIKHONOV_SCALE * scale;
    if mu == 0.0 {
        return Err(RbfError::Singular);
    }
    let mut lu = a.to_vec();
    for i in 0..n {
        lu[i * n + i] += mu;
    }
    let (perm, ratio) = lu_factor(&mut lu, n);
    if ratio == 0.0 {
        return Err(RbfError::Singular);
    }
    let weights = lu_solve(&lu, n, &perm, f);
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(RbfError::Singular);
    }
    Ok(Solution { weights, regularized: true })
}

/// A solved local interpolation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfSystem {
    centers: Vec<Point2>,
    values: Vec<f64>,
    kernel: Kernel,
    weights: Vec<f64>,
    regularized: bool,
}

impl RbfSystem {
    /// Assembles and solves the system under the distance functional `dist2`.
    pub fn solve(
        centers: Vec<Point2>,
        values: Vec<f64>,
        kernel: Kernel,
        dist2: impl Fn(Point2, Point2) -> f64,
    ) -> Result<Self, RbfError> {
        if centers.len() != values.len() {
            return Err(RbfError::LengthMismatch { centers: centers.len(), values: values.len() });
        }
        let a = assemble(&centers, &kernel, dist2);
        let sol = solve(&a, &values)?;
        Ok(Self { centers, values, kernel, weights: sol.weights, regularized: sol.regularized })
    }

    /// `sum_i w_i phi(dist2(x, x_i))`.
    #[inline]
    pub fn evaluate(&self, x: Point2, dist2: impl Fn(Point2, Point2) -> f64) -> f64 {
        let mut acc = 0.0;
        for (c, w) in self.centers.iter().zip(&self.weights) {
            acc += w * self.kernel.eval(dist2(x, *c));
        }
        acc
    }

    pub fn centers(&self) -> &[Point2] {
        &self.centers
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn is_regularized(&self) -> bool {
        self.regularized
    }
}

/// Squared Euclidean distance, the isotropic metric.
#[inline]
pub fn euclidean_dist2(a: Point2, b: Point2) -> f64 {
    a.dist2(b)
}
