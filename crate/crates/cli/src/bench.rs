//! The `bench` subcommand: one encode per image, one decode per method.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, Context};
use meshpix::metrics::{compression_ratio, format_db, payload_bytes, quality};
use meshpix::{GrayImage, Kernel, KernelKind, Method, QualityReport, RestoreConfig, TensorSource, TriMesh};

use crate::commands::{pipeline_failure, read_image, resolve, Classify, CmdResult, Failure, Resolved};
use crate::{BenchArgs, ConfigArgs, TensorMode};

/// One `method[:kernel[:c]]` bench column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub method: Method,
    pub kernel: Option<KernelKind>,
    pub shape: Option<f64>,
}

impl FromStr for Cell {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.trim().split(':');
        let method = parts.next().unwrap_or("").parse::<Method>()?;
        let kernel = parts.next().map(str::parse::<KernelKind>).transpose()?;
        let shape = parts.next().map(str::parse::<f64>).transpose().with_context(|| format!("shape in {s:?}"))?;
        if parts.next().is_some() {
            return Err(anyhow!("expected method[:kernel[:c]], got {s:?}"));
        }
        Ok(Cell { method, kernel, shape })
    }
}

pub const DEFAULT_CELLS: [&str; 4] =
    ["piecewise", "triangle_iso_rbf:mq:0.5", "triangle_arbf:mq:0.5", "triangle_arbf:imq:1.8"];

impl Cell {
    fn restore_config(&self, base: &RestoreConfig) -> anyhow::Result<RestoreConfig> {
        let kind = self.kernel.unwrap_or(base.kernel.kind());
        let shape = match (self.shape, self.kernel) {
            (Some(c), _) => c,
            (None, Some(k)) => k.default_shape(),
            (None, None) => base.kernel.shape(),
        };
        Ok(RestoreConfig { method: self.method, kernel: Kernel::new(kind, shape)?, ..*base })
    }
}

fn evaluate(
    name: &str,
    img: &GrayImage,
    mesh: &TriMesh,
    cfg: &RestoreConfig,
    r: &Resolved,
    mode: TensorMode,
) -> Result<QualityReport, Failure> {
    let source = match mode {
        TensorMode::Original => TensorSource::Original(img),
        TensorMode::Predecode => TensorSource::Predecode,
    };
    let start = Instant::now();
    let out =
        meshpix::decode(mesh, cfg, &r.config.tensor, source, Some(img)).map_err(|e| pipeline_failure(e, "decode"))?;
    let secs = start.elapsed().as_secs_f64();
    let restored = if cfg.scale > 1 { out.image.box_downsample(cfg.scale) } else { out.image };
    Ok(QualityReport {
        image: name.to_string(),
        method: cfg.method.to_string(),
        kernel: cfg.kernel.kind().to_string(),
        shape_c: cfg.kernel.shape(),
        compression_ratio: compression_ratio(mesh, img),
        quality: quality(img, &restored).internal()?,
        wall_time_seconds: secs,
        regularized_systems: out.stats.regularized_systems,
        fallback_triangles: out.stats.fallback_triangles,
        payload_bytes: payload_bytes(mesh),
        overrides: r.overrides.clone(),
    })
}

/// Aligned plain-text table.
pub fn table(rows: &[QualityReport]) -> String {
    let header = ["image", "method", "kernel", "c", "ratio", "psnr_db", "rmse", "time_s", "reg", "fallback"];
    let cells: Vec<[String; 10]> = rows
        .iter()
        .map(|r| {
            [
                r.image.clone(),
                r.method.clone(),
                r.kernel.clone(),
                r.shape_c.to_string(),
                format!("{:.2}%", 100.0 * r.compression_ratio),
                format_db(r.quality.psnr_db),
                format!("{:.4}", r.quality.rmse),
                format!("{:.3}", r.wall_time_seconds),
                r.regularized_systems.to_string(),
                r.fallback_triangles.to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |fields: Vec<&str>| {
        let padded: Vec<String> = fields.iter().zip(widths).map(|(f, w)| format!("{f:<w$}")).collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(header.to_vec());
    for row in &cells {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

pub fn csv(rows: &[QualityReport]) -> String {
    let mut out = String::from(QualityReport::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn run(args: &ConfigArgs, b: &BenchArgs) -> CmdResult {
    let r = resolve(args, &[])?;
    let specs: Vec<String> =
        if b.methods.is_empty() { DEFAULT_CELLS.iter().map(|s| s.to_string()).collect() } else { b.methods.clone() };
    let cells = specs
        .iter()
        .map(|s| s.parse::<Cell>().with_context(|| format!("--methods {s}")))
        .collect::<anyhow::Result<Vec<_>>>()
        .input()?;
    let base = r.config.restore_config();
    let configs = cells.iter().map(|c| c.restore_config(&base)).collect::<anyhow::Result<Vec<_>>>().input()?;

    let mut rows = Vec::new();
    let mut failed = 0usize;
    for path in &b.images {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let result = read_image(path).and_then(|img| {
            let enc = meshpix::encode(&img, &r.config.sampling).map_err(|e| pipeline_failure(e, "encode"))?;
            Ok((img, enc.mesh))
        });
        let (img, mesh) = match result {
            Ok(v) => v,
            Err(f) => {
                eprintln!("error: {}: {:#}", path.display(), f.error());
                failed += configs.len();
                continue;
            }
        };
        for cfg in &configs {
            match evaluate(&name, &img, &mesh, cfg, &r, b.tensor) {
                Ok(row) => rows.push(row),
                Err(f) => {
                    eprintln!("error: {} {}: {:#}", name, cfg.method, f.error());
                    failed += 1;
                }
            }
        }
    }

    print!("{}", table(&rows));
    let mut settings = format!("tensor={:?}", b.tensor).to_lowercase();
    for o in &r.overrides {
        settings.push_str(&format!(" set:{o}"));
    }
    println!("{settings}");
    if let Some(path) = &b.csv {
        write_csv(path, &rows)?;
    }
    if failed > 0 {
        return Err(Failure::Internal(anyhow!("{failed} bench cell(s) failed")));
    }
    Ok(())
}

fn write_csv(path: &Path, rows: &[QualityReport]) -> CmdResult {
    fs::write(path, csv(rows)).with_context(|| format!("writing {}", path.display())).input()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_parsing() {
        let c: Cell = "arbf:imq:1.8".parse().unwrap();
        assert_eq!(
            c,
            Cell { method: Method::TriangleArbf, kernel: Some(KernelKind::InverseMultiquadric), shape: Some(1.8) }
        );
        let c: Cell = "piecewise".parse().unwrap();
        assert_eq!(c.kernel, None);
        assert!("arbf:mq:0.5:9".parse::<Cell>().is_err());
        assert!("arbf:cubic".parse::<Cell>().is_err());
        assert!("nope".parse::<Cell>().is_err());
    }

    #[test]
    fn kernel_without_shape_uses_kernel_default() {
        let base = RestoreConfig::default();
        let cfg = "arbf:imq".parse::<Cell>().unwrap().restore_config(&base).unwrap();
        assert_eq!(cfg.kernel.shape(), 1.8);
        let cfg = "iso".parse::<Cell>().unwrap().restore_config(&base).unwrap();
        assert_eq!(cfg.kernel, base.kernel);
    }

    #[test]
    fn empty_table_has_header_only() {
        assert_eq!(table(&[]).lines().count(), 1);
        assert_eq!(csv(&[]), format!("{}\n", QualityReport::CSV_HEADER));
    }
}
