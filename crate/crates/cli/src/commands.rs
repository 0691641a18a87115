//! Encode, decode and compare subcommands.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use meshpix::metrics::{format_db, payload_bytes, quality, vertex_ratio};
use meshpix::{
    load_image, load_mesh, save_image, save_mesh, CodecConfig, GrayImage, PipelineError, TensorSource, TriMesh,
};

use crate::{ConfigArgs, DecodeArgs};

/// A failed command with its exit code class.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or unusable input files; exit code 2.
    Input(anyhow::Error),
    /// Numerical or internal failure; exit code 1.
    Internal(anyhow::Error),
}

impl Failure {
    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Input(e) | Failure::Internal(e) => e,
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Internal(_) => 1,
        }
    }
}

pub type CmdResult = Result<(), Failure>;

pub trait Classify<T> {
    fn input(self) -> Result<T, Failure>;
    fn internal(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(e.into()))
    }

    fn internal(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Internal(e.into()))
    }
}

/// Pipeline errors caused by what the user supplied count as input errors.
pub fn pipeline_failure(e: PipelineError, stage: &str) -> Failure {
    let err = anyhow!(e.to_string()).context(stage.to_string());
    match e {
        PipelineError::EmptyImage | PipelineError::TensorSource { .. } | PipelineError::NeedsSource(_) => {
            Failure::Input(err)
        }
        _ => Failure::Internal(err),
    }
}

/// Effective configuration plus the `key=value` overrides that produced it.
pub struct Resolved {
    pub config: CodecConfig,
    pub overrides: Vec<String>,
}

/// Applies defaults, then the config file, then `--set`, then `extra`.
pub fn resolve(args: &ConfigArgs, extra: &[String]) -> Result<Resolved, Failure> {
    let mut config = CodecConfig::default();
    let mut overrides = Vec::new();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display())).input()?;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if !line.is_empty() {
                overrides.push(line.replace(' ', ""));
            }
        }
        config.apply_text(&text).with_context(|| format!("config {}", path.display())).input()?;
    }
    for a in args.set.iter().chain(extra) {
        config.apply(a).with_context(|| format!("--set {a}")).input()?;
        overrides.push(a.replace(' ', ""));
    }
    config.validate().input()?;
    Ok(Resolved { config, overrides })
}

pub fn read_image(path: &Path) -> Result<GrayImage, Failure> {
    load_image(path).with_context(|| format!("loading image {}", path.display())).input()
}

pub fn read_mesh(path: &Path) -> Result<TriMesh, Failure> {
    load_mesh(path).with_context(|| format!("loading mesh {}", path.display())).input()
}

fn echo(overrides: &[String]) -> String {
    overrides.iter().map(|o| format!(" set:{o}")).collect()
}

pub fn encode(args: &ConfigArgs, image: &Path, mesh_path: &Path) -> CmdResult {
    let r = resolve(args, &[])?;
    let img = read_image(image)?;
    let start = Instant::now();
    let enc = meshpix::encode(&img, &r.config.sampling).map_err(|e| pipeline_failure(e, "encode"))?;
    let secs = start.elapsed().as_secs_f64();
    save_mesh(&enc.mesh, mesh_path).with_context(|| format!("writing mesh {}", mesh_path.display())).input()?;
    let m = &enc.mesh;
    println!(
        "image={} vertices={} triangles={} constrained_edges={} skipped_constraints={} ratio={:.6} payload_bytes={} time_s={:.4}{}",
        image.display(),
        m.vertices.len(),
        m.triangles.len(),
        m.constrained_edges.len(),
        enc.skipped_constraints,
        vertex_ratio(m.vertices.len(), img.width(), img.height()),
        payload_bytes(m),
        secs,
        echo(&r.overrides)
    );
    Ok(())
}

pub fn decode(args: &ConfigArgs, d: &DecodeArgs) -> CmdResult {
    let mut extra = Vec::new();
    if let Some(m) = &d.method {
        extra.push(format!("restore.method={m}"));
    }
    if let Some(k) = &d.kernel {
        extra.push(format!("rbf.kernel={k}"));
    }
    if let Some(c) = d.shape {
        extra.push(format!("rbf.shape_c={c}"));
    }
    if let Some(s) = d.scale {
        extra.push(format!("restore.scale={s}"));
    }
    let r = resolve(args, &extra)?;
    let mesh = read_mesh(&d.mesh)?;
    let original = d.tensor_from.as_deref().map(read_image).transpose()?;
    let source = match &original {
        Some(img) => TensorSource::Original(img),
        None => TensorSource::Predecode,
    };
    let cfg = r.config.restore_config();
    let start = Instant::now();
    let out = meshpix::decode(&mesh, &cfg, &r.config.tensor, source, original.as_ref())
        .map_err(|e| pipeline_failure(e, "decode"))?;
    let secs = start.elapsed().as_secs_f64();
    save_image(&out.image, &d.output).with_context(|| format!("writing {}", d.output.display())).input()?;
    println!(
        "mesh={} method={} kernel={} c={} tensor={} width={} height={} time_s={:.4} regularized_systems={} fallback_triangles={}{}",
        d.mesh.display(),
        cfg.method,
        cfg.kernel.kind(),
        cfg.kernel.shape(),
        if original.is_some() { "original" } else { "predecode" },
        out.image.width(),
        out.image.height(),
        secs,
        out.stats.regularized_systems,
        out.stats.fallback_triangles,
        echo(&r.overrides)
    );
    Ok(())
}

/// Brings `restored` to the size of `original`, box-averaging an integer
/// super-resolution factor away.
pub fn match_size(original: &GrayImage, restored: GrayImage) -> Result<GrayImage, Failure> {
    let (w, h) = (original.width(), original.height());
    let (rw, rh) = (restored.width(), restored.height());
    if (rw, rh) == (w, h) {
        return Ok(restored);
    }
    if rw % w == 0 && rh % h == 0 && rw / w == rh / h {
        return Ok(restored.box_downsample(rw / w));
    }
    Err(Failure::Input(anyhow!("size mismatch: original is {w}x{h}, restored is {rw}x{rh}")))
}

/// `|a - b|` stretched so the largest difference maps to 255.
pub fn difference_image(a: &GrayImage, b: &GrayImage) -> GrayImage {
    let diff: Vec<f64> = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).collect();
    let peak = diff.iter().copied().fold(0.0, f64::max);
    let gain = if peak > 0.0 { 255.0 / peak } else { 0.0 };
    GrayImage::new(a.width(), a.height(), diff.into_iter().map(|d| d * gain).collect()).expect("same size")
}

pub fn compare(original: &Path, restored: &Path, diff: Option<&Path>) -> CmdResult {
    let o = read_image(original)?;
    let r = match_size(&o, read_image(restored)?)?;
    let q = quality(&o, &r).input()?;
    let diff_path = diff.map(Path::to_path_buf).unwrap_or_else(|| {
        let mut p = restored.as_os_str().to_owned();
        p.push(".diff.pgm");
        PathBuf::from(p)
    });
    save_image(&difference_image(&o, &r), &diff_path)
        .with_context(|| format!("writing {}", diff_path.display()))
        .input()?;
    println!(
        "original={} restored={} psnr_db={} rmse={:.6} psnr_db_unquantized={} rmse_unquantized={:.6} diff={}",
        original.display(),
        restored.display(),
        format_db(q.psnr_db),
        q.rmse,
        format_db(q.psnr_db_unquantized),
        q.rmse_unquantized,
        diff_path.display()
    );
    Ok(())
}
