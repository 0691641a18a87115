//! Flat `key=value` configuration for the whole codec.

use std::fmt::Display;
use std::str::FromStr;

use thiserror::Error;

use crate::rbf::{Kernel, KernelKind};
use crate::restore::{DistanceUnit, Method, MetricPoint, RestoreConfig, SupportPolicy};
use crate::sampling::SamplingConfig;
use crate::tensor::TensorParams;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("line {line}: expected key=value, got {text:?}")]
    Syntax { line: usize, text: String },
}

/// Every recognized key, in documentation order.
pub const KEYS: &[&str] = &[
    "canny.sigma",
    "canny.low",
    "canny.high",
    "canny.min_chain",
    "pca.window",
    "pca.dense_spacing",
    "pca.sparse_spacing",
    "pca.threshold",
    "halftone.fraction",
    "halftone.sigma",
    "uniform.spacing",
    "min_separation",
    "tensor.sigma",
    "tensor.kappa",
    "rbf.kernel",
    "rbf.shape_c",
    "restore.method",
    "restore.scale",
    "restore.support",
    "restore.metric_point",
    "restore.distance_unit",
    "restore.parallel",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CodecConfig {
    pub sampling: SamplingConfig,
    pub tensor: TensorParams,
    pub kernel: KernelKind,
    /// `None` selects the kernel's default shape.
    pub shape_c: Option<f64>,
    pub method: Method,
    pub scale: usize,
    pub support: SupportPolicy,
    pub metric_point: MetricPoint,
    pub distance_unit: DistanceUnit,
    pub parallel: bool,
}

impl Default for CodecConfig {
    fn default() -> Self {
        let r = RestoreConfig::default();
        Self {
            sampling: SamplingConfig::default(),
            tensor: TensorParams::default(),
            kernel: r.kernel.kind(),
            shape_c: None,
            method: r.method,
            scale: r.scale,
            support: r.support,
            metric_point: r.metric_point,
            distance_unit: r.distance_unit,
            parallel: r.parallel,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: Display,
{
    value.trim().parse::<T>().map_err(|e| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

fn invalid(key: &str, value: &str, reason: &str) -> ConfigError {
    ConfigError::InvalidValue { key: key.to_string(), value: value.to_string(), reason: reason.to_string() }
}

fn positive(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = parse(key, value)?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(key, value, "must be positive"))
    }
}

fn non_negative(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = parse(key, value)?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(invalid(key, value, "must be non-negative"))
    }
}

fn unit(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = non_negative(key, value)?;
    if v <= 1.0 {
        Ok(v)
    } else {
        Err(invalid(key, value, "must lie in [0, 1]"))
    }
}

impl CodecConfig {
    pub fn shape(&self) -> f64 {
        self.shape_c.unwrap_or_else(|| self.kernel.default_shape())
    }

    pub fn kernel(&self) -> Kernel {
        Kernel::new(self.kernel, self.shape()).expect("shape validated on set")
    }

    pub fn restore_config(&self) -> RestoreConfig {
        RestoreConfig {
            method: self.method,
            kernel: self.kernel(),
            scale: self.scale,
            support: self.support,
            metric_point: self.metric_point,
            distance_unit: self.distance_unit,
            parallel: self.parallel,
        }
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let s = &mut self.sampling;
        match key {
            "canny.sigma" => s.canny.sigma = non_negative(key, value)?,
            "canny.low" => s.canny.low = unit(key, value)?,
            "canny.high" => s.canny.high = unit(key, value)?,
            "canny.min_chain" => s.canny.min_chain = parse(key, value)?,
            "pca.window" => {
                let w: usize = parse(key, value)?;
                if w < 3 {
                    return Err(invalid(key, value, "must be at least 3"));
                }
                s.pca.window = w;
            }
            "pca.dense_spacing" => s.pca.dense_spacing = positive(key, value)?,
            "pca.sparse_spacing" => s.pca.sparse_spacing = positive(key, value)?,
            "pca.threshold" => s.pca.anisotropy_threshold = unit(key, value)?,
            "halftone.fraction" => s.halftone_fraction = unit(key, value)?,
            "halftone.sigma" => s.halftone_sigma = non_negative(key, value)?,
            "uniform.spacing" => s.uniform_spacing = positive(key, value)?,
            "min_separation" => s.min_separation = non_negative(key, value)?,
            "tensor.sigma" => self.tensor.sigma = non_negative(key, value)?,
            "tensor.kappa" => self.tensor.kappa = non_negative(key, value)?,
            "rbf.kernel" => self.kernel = parse(key, value)?,
            "rbf.shape_c" => self.shape_c = Some(positive(key, value)?),
            "restore.method" => self.method = parse(key, value)?,
            "restore.scale" => {
                let v: usize = parse(key, value)?;
                if v == 0 {
                    return Err(invalid(key, value, "must be at least 1"));
                }
                self.scale = v;
            }
            "restore.support" => self.support = parse(key, value)?,
            "restore.metric_point" => self.metric_point = parse(key, value)?,
            "restore.distance_unit" => self.distance_unit = parse(key, value)?,
            "restore.parallel" => self.parallel = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies a `key=value` assignment.
    pub fn apply(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) =
            assignment.split_once('=').ok_or_else(|| ConfigError::Syntax { line: 0, text: assignment.to_string() })?;
        self.set(k.trim(), v.trim())
    }

    /// Applies a config file body: one `key=value` per line, `#` comments.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.to_string() })?;
            self.set(k.trim(), v.trim())?;
        }
        self.validate()
    }

    /// Cross-key checks.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let c = &self.sampling.canny;
        if c.low > c.high {
            return Err(invalid("canny.low", &c.low.to_string(), "must not exceed canny.high"));
        }
        let p = &self.sampling.pca;
        if p.dense_spacing > p.sparse_spacing {
            return Err(invalid(
                "pca.dense_spacing",
                &p.dense_spacing.to_string(),
                "must not exceed pca.sparse_spacing",
            ));
        }
        Ok(())
    }
}
