use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use meshpix::{load_image, load_mesh, save_image, GrayImage};
use tempfile::TempDir;

fn meshpix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meshpix")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn scene(dir: &TempDir) -> PathBuf {
    let img = GrayImage::from_fn(48, 40, |x, y| {
        let (dx, dy) = (x as f64 - 20.0, y as f64 - 18.0);
        if dx * dx + dy * dy < 120.0 {
            210.0
        } else {
            40.0 + 2.0 * y as f64
        }
    });
    let path = dir.path().join("scene.pgm");
    save_image(&img, &path).unwrap();
    path
}

#[test]
fn encode_decode_compare_round_trip() {
    let dir = TempDir::new().unwrap();
    let src = scene(&dir);
    let mesh = dir.path().join("scene.mesh");
    let out = dir.path().join("out.pgm");

    let o = meshpix(&["encode", p(&src), p(&mesh)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("ratio="));
    assert!(load_mesh(&mesh).unwrap().has_intensities());

    let o = meshpix(&["decode", p(&mesh), p(&out), "--method", "arbf", "--kernel", "mq", "--c", "0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("tensor=predecode"));

    let diff = dir.path().join("d.pgm");
    let o = meshpix(&["compare", p(&src), p(&out), "--diff", p(&diff)]);
    assert!(o.status.success());
    let line = stdout(&o);
    let psnr: f64 = line.split("psnr_db=").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!(psnr > 20.0, "{line}");
    assert!(diff.exists());
}

#[test]
fn piecewise_decode_is_flat_per_triangle_and_scales() {
    let dir = TempDir::new().unwrap();
    let src = scene(&dir);
    let mesh = dir.path().join("m.mesh");
    assert!(meshpix(&["encode", p(&src), p(&mesh)]).status.success());
    let out = dir.path().join("big.pgm");
    let o = meshpix(&["decode", p(&mesh), p(&out), "--method", "piecewise", "--scale", "2"]);
    assert!(o.status.success());
    let img = load_image(&out).unwrap();
    assert_eq!((img.width(), img.height()), (96, 80));
    let m = load_mesh(&mesh).unwrap();
    let values: std::collections::BTreeSet<u8> =
        m.center_intensity.iter().map(|&v| meshpix::image::quantize(v)).collect();
    assert!(img.to_bytes().iter().all(|b| values.contains(b)));
}

#[test]
fn compare_with_itself_is_infinite_and_black() {
    let dir = TempDir::new().unwrap();
    let src = scene(&dir);
    let diff = dir.path().join("d.pgm");
    let o = meshpix(&["compare", p(&src), p(&src), "--diff", p(&diff)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("psnr_db=inf"));
    assert!(load_image(&diff).unwrap().data().iter().all(|&v| v == 0.0));
}

#[test]
fn runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let src = scene(&dir);
    let mut bytes = Vec::new();
    for run in 0..2 {
        let mesh = dir.path().join(format!("{run}.mesh"));
        let out = dir.path().join(format!("{run}.pgm"));
        assert!(meshpix(&["encode", p(&src), p(&mesh)]).status.success());
        assert!(meshpix(&["decode", p(&mesh), p(&out), "--tensor-from", p(&src)]).status.success());
        bytes.push((std::fs::read(&mesh).unwrap(), std::fs::read(&out).unwrap()));
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let src = scene(&dir);
    let missing = dir.path().join("missing.pgm");
    let o = meshpix(&["encode", p(&missing), p(&dir.path().join("x.mesh"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.pgm"));

    let o = meshpix(&["--set", "tensor.kappa=-3", "encode", p(&src), p(&dir.path().join("x.mesh"))]);
    assert_eq!(o.status.code(), Some(2));
    let o = meshpix(&["encode", p(&src), p(&dir.path().join("x.mesh")), "--set", "no.such.key=1"]);
    assert_eq!(o.status.code(), Some(2));

    let small = dir.path().join("small.pgm");
    save_image(&GrayImage::filled(10, 7, 5.0), &small).unwrap();
    assert_eq!(meshpix(&["compare", p(&src), p(&small)]).status.code(), Some(2));
    assert_eq!(meshpix(&["decode"]).status.code(), Some(2));

    let mesh = dir.path().join("m.mesh");
    assert!(meshpix(&["encode", p(&src), p(&mesh)]).status.success());
    let o = meshpix(&["decode", p(&mesh), p(&dir.path().join("v.pgm")), "--method", "vertex_iso_rbf"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_then_flags_and_echo() {
    let dir = TempDir::new().unwrap();
    let src = scene(&dir);
    let cfg = dir.path().join("codec.cfg");
    std::fs::write(&cfg, "# sampling\nuniform.spacing = 6\nrbf.kernel=imq\n").unwrap();
    let mesh = dir.path().join("m.mesh");
    let o = meshpix(&["--config", p(&cfg), "encode", p(&src), p(&mesh)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("set:uniform.spacing=6"));

    let out = dir.path().join("o.pgm");
    let o = meshpix(&["decode", p(&mesh), p(&out), "--config", p(&cfg), "--set", "rbf.shape_c=2", "--c", "3"]);
    assert!(o.status.success());
    let line = stdout(&o);
    assert!(line.contains("kernel=imq c=3 "), "{line}");
    assert!(line.contains("set:rbf.shape_c=2 set:rbf.shape_c=3"), "{line}");
}

#[test]
fn bench_table_and_csv() {
    let dir = TempDir::new().unwrap();
    let src = scene(&dir);
    let csv = dir.path().join("t.csv");
    let o = meshpix(&["bench", p(&src), "--csv", p(&csv)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], meshpix::QualityReport::CSV_HEADER);
    assert_eq!(lines.len(), 5);
    assert!(lines[1].contains(",piecewise,") && lines[4].contains(",triangle_arbf,imq,1.8,"));
    for row in &lines[1..] {
        let time: f64 = row.split(',').nth(7).unwrap().parse().unwrap();
        assert!(time >= 0.0);
    }
    assert_eq!(stdout(&o).lines().count(), 6);

    let o = meshpix(&["bench"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 2);

    let o = meshpix(&["bench", p(&src), p(&dir.path().join("gone.pgm")), "--methods", "piecewise"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("piecewise"));
    assert_eq!(meshpix(&["bench", "--methods", "warp"]).status.code(), Some(2));
}
