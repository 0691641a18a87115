//! Real-valued grayscale rasters and their PGM / PNG file I/O.
//!
//! Intensities are kept as `f64` so that decoded (possibly super-resolved)
//! images carry sub-integer precision until they are written out. Quantization
//! to 8 bits happens only in [`GrayImage::to_bytes`] and [`save_image`].

use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat, ImageReader};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("unreadable file {path}: {reason}")]
    Unreadable { path: PathBuf, reason: String },
    #[error("unsupported format for {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },
    #[error("zero-dimension image ({width}x{height})")]
    ZeroDimension { width: usize, height: usize },
    #[error("pixel buffer holds {len} values, expected {width}x{height}")]
    BadLength { width: usize, height: usize, len: usize },
    #[error("failed to write {path}: {reason}")]
    Write { path: PathBuf, reason: String },
}

/// Row-major grayscale image with real-valued intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self, ImageError> {
        if data.len() != width * height {
            return Err(ImageError::BadLength { width, height, len: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self { width, height, data: vec![value; width * height] }
    }

    /// Builds an image from `f(x, y)` evaluated at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self, ImageError> {
        Self::new(width, height, bytes.iter().map(|&b| f64::from(b)).collect())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    /// Bilinear sample at a real position; coordinates are clamped to the image.
    pub fn bilinear(&self, x: f64, y: f64) -> f64 {
        bilinear_sample(&self.data, self.width, self.height, x, y)
    }

    /// Clamps every intensity into `[0, 255]`.
    pub fn clamped(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| v.clamp(0.0, 255.0)).collect(),
        }
    }

    /// Rounds half away from zero and clamps, i.e. what a file round-trip yields.
    pub fn quantized(&self) -> GrayImage {
        GrayImage { width: self.width, height: self.height, data: self.to_bytes().into_iter().map(f64::from).collect() }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }

    /// Averages non-overlapping `factor x factor` blocks.
    pub fn box_downsample(&self, factor: usize) -> GrayImage {
        assert!(factor >= 1);
        let w = self.width / factor;
        let h = self.height / factor;
        let norm = (factor * factor) as f64;
        GrayImage::from_fn(w, h, |x, y| {
            let mut acc = 0.0;
            for dy in 0..factor {
                for dx in 0..factor {
                    acc += self.get(x * factor + dx, y * factor + dy);
                }
            }
            acc / norm
        })
    }
}

/// Rounds half away from zero, then clamps into the 8-bit range.
pub fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    v.round().clamp(0.0, 255.0) as u8
}

/// Bilinear interpolation on a row-major grid with clamped coordinates.
///
/// Written as nested lerps so that equal neighbours reproduce their value
/// exactly.
pub(crate) fn bilinear_sample(data: &[f64], width: usize, height: usize, x: f64, y: f64) -> f64 {
    let x = x.clamp(0.0, (width - 1) as f64);
    let y = y.clamp(0.0, (height - 1) as f64);
    let x0 = (x.floor() as usize).min(width - 1);
    let y0 = (y.floor() as usize).min(height - 1);
    let x1 = (x0 + 1).min(width - 1);
    let y1 = (y0 + 1).min(height - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
    let top = lerp(data[y0 * width + x0], data[y0 * width + x1], fx);
    let bottom = lerp(data[y1 * width + x0], data[y1 * width + x1], fx);
    lerp(top, bottom, fy)
}

fn luminance(r: u8, g: u8, b: u8) -> f64 {
    0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b)
}

/// Reads an 8-bit PGM (P2/P5) or PNG file. Color inputs are converted with
/// the 0.299 / 0.587 / 0.114 luminance weights.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage, ImageError> {
    let path = path.as_ref();
    let unreadable = |reason: String| ImageError::Unreadable { path: path.to_path_buf(), reason };
    let bytes = fs::read(path).map_err(|e| unreadable(e.to_string()))?;
    if bytes.is_empty() {
        return Err(unreadable("file is empty".into()));
    }
    let reader = ImageReader::new(Cursor::new(bytes)).with_guessed_format().map_err(|e| unreadable(e.to_string()))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Pnm) => {}
        Some(other) => {
            return Err(ImageError::UnsupportedFormat { path: path.to_path_buf(), reason: format!("{other:?}") })
        }
        None => return Err(unreadable("unrecognized image header".into())),
    }
    let decoded = reader.decode().map_err(|e| unreadable(e.to_string()))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    if w == 0 || h == 0 {
        return Err(ImageError::ZeroDimension { width: w, height: h });
    }
    let data: Vec<f64> = match decoded {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(f64::from).collect(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| f64::from(p.0[0])).collect(),
        DynamicImage::ImageRgb8(buf) => buf.pixels().map(|p| luminance(p[0], p[1], p[2])).collect(),
        DynamicImage::ImageRgba8(buf) => buf.pixels().map(|p| luminance(p[0], p[1], p[2])).collect(),
        other => {
            return Err(ImageError::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: format!("unsupported pixel layout {:?}", other.color()),
            })
        }
    };
    GrayImage::new(w, h, data)
}

/// Writes an 8-bit binary PGM (`.pgm`) or PNG (`.png`), chosen by extension.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let path = path.as_ref();
    if img.width == 0 || img.height == 0 {
        return Err(ImageError::ZeroDimension { width: img.width, height: img.height });
    }
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).unwrap_or_default();
    let write_err = |reason: String| ImageError::Write { path: path.to_path_buf(), reason };
    let bytes = img.to_bytes();
    let (w, h) = (img.width as u32, img.height as u32);
    let mut out = Vec::new();
    match ext.as_str() {
        "pgm" => PnmEncoder::new(&mut out)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(&bytes, w, h, ExtendedColorType::L8)
            .map_err(|e| write_err(e.to_string()))?,
        "png" => image::codecs::png::PngEncoder::new(&mut out)
            .write_image(&bytes, w, h, ExtendedColorType::L8)
            .map_err(|e| write_err(e.to_string()))?,
        _ => {
            return Err(ImageError::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: "output extension must be .pgm or .png".into(),
            })
        }
    }
    fs::write(path, out).map_err(|e| write_err(e.to_string()))
}
