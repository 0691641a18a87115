//! Triangle meshes over an image frame and the line-oriented `MESHPIX 1`
//! text format.
//!
//! ```text
//! MESHPIX 1
//! image <width> <height>
//! vertices <V>          followed by V lines `x y`
//! triangles <T>         followed by T lines `i j k` (0-based)
//! constrained <C>       followed by C lines `i j`
//! intensities <T|0>     followed by one real per triangle
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. Reals are written in
//! Rust's shortest round-trip decimal form, so a save/load cycle is exact.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::geometry::{orient2d, Point2};

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("malformed mesh file at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("index out of range: {index} >= {count}")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("non-finite coordinate for vertex {0}")]
    NonFinite(usize),
    #[error("triangle {0} is degenerate")]
    Degenerate(usize),
    #[error("constrained edge ({0}, {1}) is not an edge of any triangle")]
    DanglingConstraint(usize, usize),
    #[error("expected {expected} center intensities, found {found}")]
    IntensityCount { expected: usize, found: usize },
    #[error("i/o error on {path}: {reason}")]
    Io { path: String, reason: String },
}

/// Triangulated image representation.
///
/// `width`/`height` give the pixel frame the mesh was built for (0 for meshes
/// built from free-standing point sets). Triangles are stored counter-clockwise
/// in the (x right, y up) sense of [`orient2d`].
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub width: usize,
    pub height: usize,
    pub vertices: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
    pub constrained_edges: Vec<[usize; 2]>,
    pub centers: Vec<Point2>,
    /// Empty until the encoder assigns per-triangle intensities.
    pub center_intensity: Vec<f64>,
}

impl TriMesh {
    /// Builds a mesh, normalizing triangle orientation and computing centroids.
    pub fn new(
        width: usize,
        height: usize,
        vertices: Vec<Point2>,
        triangles: Vec<[usize; 3]>,
        constrained_edges: Vec<[usize; 2]>,
    ) -> Result<Self, MeshError> {
        let n = vertices.len();
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(MeshError::NonFinite(i));
        }
        let mut tris = triangles;
        for (t, tri) in tris.iter_mut().enumerate() {
            for &i in tri.iter() {
                if i >= n {
                    return Err(MeshError::IndexOutOfRange { index: i, count: n });
                }
            }
            let o = orient2d(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if o == 0.0 {
                return Err(MeshError::Degenerate(t));
            }
            if o < 0.0 {
                tri.swap(1, 2);
            }
        }
        for e in &constrained_edges {
            for &i in e {
                if i >= n {
                    return Err(MeshError::IndexOutOfRange { index: i, count: n });
                }
            }
        }
        let centers = centroids(&vertices, &tris);
        let mesh =
            Self { width, height, vertices, triangles: tris, constrained_edges, centers, center_intensity: Vec::new() };
        mesh.check_constraints()?;
        Ok(mesh)
    }

    pub fn with_intensities(mut self, values: Vec<f64>) -> Result<Self, MeshError> {
        if values.len() != self.triangles.len() {
            return Err(MeshError::IntensityCount { expected: self.triangles.len(), found: values.len() });
        }
        self.center_intensity = values;
        Ok(self)
    }

    pub fn with_frame(mut self, width: usize, height: usize) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    pub fn has_intensities(&self) -> bool {
        !self.triangles.is_empty() && self.center_intensity.len() == self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Undirected edge set, each edge as `(min, max)`.
    pub fn edge_set(&self) -> HashSet<(usize, usize)> {
        let mut set = HashSet::with_capacity(self.triangles.len() * 2);
        for tri in &self.triangles {
            for k in 0..3 {
                set.insert(undirected(tri[k], tri[(k + 1) % 3]));
            }
        }
        set
    }

    fn check_constraints(&self) -> Result<(), MeshError> {
        if self.constrained_edges.is_empty() {
            return Ok(());
        }
        let edges = self.edge_set();
        for &[a, b] in &self.constrained_edges {
            if !edges.contains(&undirected(a, b)) {
                return Err(MeshError::DanglingConstraint(a, b));
            }
        }
        Ok(())
    }
}

pub(crate) fn undirected(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn centroids(vertices: &[Point2], triangles: &[[usize; 3]]) -> Vec<Point2> {
    triangles.iter().map(|&[a, b, c]| Point2::centroid(vertices[a], vertices[b], vertices[c])).collect()
}

/// Centroid of every triangle, in triangle order.
pub fn triangle_centers(mesh: &TriMesh) -> Vec<Point2> {
    centroids(&mesh.vertices, &mesh.triangles)
}

pub fn mesh_to_string(mesh: &TriMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "MESHPIX 1");
    let _ = writeln!(s, "image {} {}", mesh.width, mesh.height);
    let _ = writeln!(s, "vertices {}", mesh.vertices.len());
    for p in &mesh.vertices {
        let _ = writeln!(s, "{} {}", p.x, p.y);
    }
    let _ = writeln!(s, "triangles {}", mesh.triangles.len());
    for [a, b, c] in &mesh.triangles {
        let _ = writeln!(s, "{a} {b} {c}");
    }
    let _ = writeln!(s, "constrained {}", mesh.constrained_edges.len());
    for [a, b] in &mesh.constrained_edges {
        let _ = writeln!(s, "{a} {b}");
    }
    let _ = writeln!(s, "intensities {}", mesh.center_intensity.len());
    for v in &mesh.center_intensity {
        let _ = writeln!(s, "{v}");
    }
    s
}

pub fn save_mesh(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let path = path.as_ref();
    fs::write(path, mesh_to_string(mesh))
        .map_err(|e| MeshError::Io { path: path.display().to_string(), reason: e.to_string() })
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriMesh, MeshError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| MeshError::Io { path: path.display().to_string(), reason: e.to_string() })?;
    parse_mesh(&text)
}

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Self { inner: it.peekable(), last: 0 }
    }

    fn next_fields(&mut self) -> Result<(usize, Vec<&'a str>), MeshError> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last = n;
                Ok((n, l.split_whitespace().collect()))
            }
            None => Err(MeshError::Malformed { line: self.last + 1, reason: "unexpected end of file".into() }),
        }
    }

    fn header(&mut self, keyword: &str) -> Result<usize, MeshError> {
        let (line, f) = self.next_fields()?;
        if f.len() != 2 || f[0] != keyword {
            return Err(MeshError::Malformed { line, reason: format!("expected `{keyword} <count>`") });
        }
        parse_num(f[1], line)
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T, MeshError> {
    s.parse().map_err(|_| MeshError::Malformed { line, reason: format!("cannot parse `{s}`") })
}

fn parse_indices<const N: usize>(lines: &mut Lines<'_>, count: usize) -> Result<Vec<[usize; N]>, MeshError> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let (line, f) = lines.next_fields()?;
        if f.len() != N {
            return Err(MeshError::Malformed { line, reason: format!("expected {N} indices") });
        }
        let mut idx = [0usize; N];
        for (slot, s) in idx.iter_mut().zip(&f) {
            *slot = parse_num(s, line)?;
        }
        out.push(idx);
    }
    Ok(out)
}

pub fn parse_mesh(text: &str) -> Result<TriMesh, MeshError> {
    let mut lines = Lines::new(text);
    let (line, magic) = lines.next_fields()?;
    if magic != ["MESHPIX", "1"] {
        return Err(MeshError::Malformed { line, reason: "missing `MESHPIX 1` header".into() });
    }
    let (line, f) = lines.next_fields()?;
    if f.len() != 3 || f[0] != "image" {
        return Err(MeshError::Malformed { line, reason: "expected `image <width> <height>`".into() });
    }
    let width: usize = parse_num(f[1], line)?;
    let height: usize = parse_num(f[2], line)?;

    let nv = lines.header("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let (line, f) = lines.next_fields()?;
        if f.len() != 2 {
            return Err(MeshError::Malformed { line, reason: "expected `x y`".into() });
        }
        let p = Point2::new(parse_num(f[0], line)?, parse_num(f[1], line)?);
        if !p.is_finite() {
            return Err(MeshError::NonFinite(i));
        }
        vertices.push(p);
    }
    let nt = lines.header("triangles")?;
    let triangles = parse_indices::<3>(&mut lines, nt)?;
    let nc = lines.header("constrained")?;
    let constrained = parse_indices::<2>(&mut lines, nc)?;
    let ni = lines.header("intensities")?;
    if ni != 0 && ni != nt {
        return Err(MeshError::IntensityCount { expected: nt, found: ni });
    }
    let mut intensities = Vec::with_capacity(ni);
    for _ in 0..ni {
        let (line, f) = lines.next_fields()?;
        if f.len() != 1 {
            return Err(MeshError::Malformed { line, reason: "expected one intensity".into() });
        }
        let v: f64 = parse_num(f[0], line)?;
        if !v.is_finite() {
            return Err(MeshError::Malformed { line, reason: "non-finite intensity".into() });
        }
        intensities.push(v);
    }
    if let Some((line, _)) = lines.inner.next() {
        return Err(MeshError::Malformed { line, reason: "trailing content".into() });
    }
    let mesh = TriMesh::new(width, height, vertices, triangles, constrained)?;
    if intensities.is_empty() {
        Ok(mesh)
    } else {
        mesh.with_intensities(intensities)
    }
}
