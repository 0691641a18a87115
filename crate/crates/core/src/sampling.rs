//! Sample-point generation for the encoder.
//!
//! Three populations are produced, in priority order:
//!
//! 1. **Canny points** – pixels of Canny edge chains, thinned along each chain
//!    with a spacing driven by the eigenvalue ratio of the local point
//!    covariance (straight runs sparse, bends dense). The thinned chains are
//!    kept and later become triangulation constraints.
//! 2. **Halftone points** – Floyd–Steinberg error diffusion of the
//!    normalized |Laplacian of Gaussian| density, which concentrates points on
//!    both sides of intensity features.
//! 3. **Uniform points** – a regular grid that fills regions left empty by the
//!    first two, plus the four image corners so that the triangulation covers
//!    the whole frame.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::filter::{gaussian_blur, laplacian, sobel};
use crate::geometry::Point2;
use crate::image::GrayImage;

/// Canny pixels closer than this to the border are discarded; keeps edge
/// points clear of the mandatory corner vertices.
const CANNY_BORDER: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleKind {
    Canny,
    Halftone,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub pos: Point2,
    pub kind: SampleKind,
}

/// A pixel path through linked edge pixels. Closed chains do not repeat their
/// first pixel at the end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeChain {
    pub pixels: Vec<(usize, usize)>,
    pub closed: bool,
}

impl EdgeChain {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct SamplePointSet {
    pub points: Vec<SamplePoint>,
    /// Ordered index sequences into `points`; every index is a canny point.
    pub edge_chains: Vec<Vec<usize>>,
}

impl SamplePointSet {
    pub fn positions(&self) -> Vec<Point2> {
        self.points.iter().map(|p| p.pos).collect()
    }

    pub fn count(&self, kind: SampleKind) -> usize {
        self.points.iter().filter(|p| p.kind == kind).count()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Consecutive chain vertices as segments, with repeats removed.
    pub fn constraint_segments(&self) -> Vec<[usize; 2]> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for chain in &self.edge_chains {
            for w in chain.windows(2) {
                let (a, b) = (w[0], w[1]);
                if a != b && seen.insert((a.min(b), a.max(b))) {
                    out.push([a, b]);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CannyParams {
    pub sigma: f64,
    /// Hysteresis thresholds as fractions of the maximum gradient magnitude.
    pub low: f64,
    pub high: f64,
    /// Chains with fewer pixels are discarded.
    pub min_chain: usize,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self { sigma: 1.4, low: 0.1, high: 0.25, min_chain: 4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaParams {
    pub window: usize,
    pub dense_spacing: f64,
    pub sparse_spacing: f64,
    /// Eigenvalue ratio at and above which the dense spacing applies.
    pub anisotropy_threshold: f64,
}

impl Default for PcaParams {
    fn default() -> Self {
        Self { window: 11, dense_spacing: 3.0, sparse_spacing: 7.0, anisotropy_threshold: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingConfig {
    pub canny: CannyParams,
    pub pca: PcaParams,
    pub halftone_fraction: f64,
    pub halftone_sigma: f64,
    pub uniform_spacing: f64,
    pub min_separation: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            canny: CannyParams::default(),
            pca: PcaParams::default(),
            halftone_fraction: 0.07,
            halftone_sigma: 1.0,
            uniform_spacing: 10.0,
            min_separation: 1.5,
        }
    }
}

// ---------------------------------------------------------------------------
// Canny

/// Raw Canny detector: Gaussian smoothing, Sobel gradients, non-maximum
/// suppression and double-threshold hysteresis. Returns a row-major mask.
pub fn canny_edge_map(img: &GrayImage, low: f64, high: f64, sigma: f64) -> Vec<bool> {
    let (w, h) = (img.width(), img.height());
    let mut edges = vec![false; w * h];
    if w <= 2 * CANNY_BORDER || h <= 2 * CANNY_BORDER {
        return edges;
    }
    let smooth = gaussian_blur(img.data(), w, h, sigma);
    let (gx, gy) = sobel(&smooth, w, h);
    let mag: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();
    let max = mag.iter().cloned().fold(0.0, f64::max);
    if max <= 1e-9 {
        return edges;
    }
    let (lo, hi) = (low * max, high * max);
    let tan22 = (std::f64::consts::PI / 8.0).tan();

    let mut candidate = vec![false; w * h];
    for y in CANNY_BORDER..h - CANNY_BORDER {
        for x in CANNY_BORDER..w - CANNY_BORDER {
            let i = y * w + x;
            let m = mag[i];
            if m < lo {
                continue;
            }
            let (ax, ay) = (gx[i].abs(), gy[i].abs());
            // (dx, dy) points along the gradient
            let (dx, dy): (isize, isize) = if ay <= ax * tan22 {
                (1, 0)
            } else if ax <= ay * tan22 {
                (0, 1)
            } else if gx[i] * gy[i] > 0.0 {
                (1, 1)
            } else {
                (1, -1)
            };
            let fwd = mag[(y as isize + dy) as usize * w + (x as isize + dx) as usize];
            let back = mag[(y as isize - dy) as usize * w + (x as isize - dx) as usize];
            // asymmetric comparison keeps exactly one pixel of a symmetric plateau
            if m > back && m >= fwd {
                candidate[i] = true;
            }
        }
    }

    let mut queue = VecDeque::new();
    for i in 0..w * h {
        if candidate[i] && mag[i] >= hi {
            edges[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if candidate[j] && !edges[j] {
                    edges[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    edges
}

const NEIGHBOR_OFFSETS: [(isize, isize); 8] = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1)];

/// Edge-pixel adjacency with the mixed (m-) rule: diagonal links are dropped
/// whenever the two pixels are already joined through a 4-neighbour, which
/// removes the spurious triangles of plain 8-connectivity.
fn m_adjacency(edges: &[bool], w: usize, h: usize) -> HashMap<usize, Vec<usize>> {
    let on =
        |x: isize, y: isize| x >= 0 && y >= 0 && x < w as isize && y < h as isize && edges[y as usize * w + x as usize];
    let mut adj = HashMap::new();
    for (i, _) in edges.iter().enumerate().filter(|(_, &e)| e) {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        let mut nb = Vec::with_capacity(4);
        for &(dx, dy) in &NEIGHBOR_OFFSETS {
            if !on(x + dx, y + dy) {
                continue;
            }
            if dx != 0 && dy != 0 && (on(x + dx, y) || on(x, y + dy)) {
                continue;
            }
            nb.push((y + dy) as usize * w + (x + dx) as usize);
        }
        adj.insert(i, nb);
    }
    adj
}

/// Splits an edge mask into maximal simple pixel paths. Paths run between
/// end/junction pixels; cycles with no such pixel become closed chains.
pub fn trace_chains(edges: &[bool], width: usize, height: usize, min_len: usize) -> Vec<EdgeChain> {
    let adj = m_adjacency(edges, width, height);
    let degree = |i: usize| adj.get(&i).map_or(0, Vec::len);
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut chains = Vec::new();
    let to_xy = |i: usize| (i % width, i / width);

    let mut order: Vec<usize> = adj.keys().copied().collect();
    order.sort_unstable();

    let walk = |start: usize, first: usize, used: &mut HashSet<(usize, usize)>| -> (Vec<usize>, bool) {
        let mut path = vec![start, first];
        used.insert(key(start, first));
        let (mut prev, mut cur) = (start, first);
        while degree(cur) == 2 && cur != start {
            let next = adj[&cur].iter().copied().find(|&n| n != prev && !used.contains(&key(cur, n)));
            match next {
                Some(n) => {
                    used.insert(key(cur, n));
                    path.push(n);
                    prev = cur;
                    cur = n;
                }
                None => break,
            }
        }
        let closed = path.len() > 2 && path.last() == Some(&start);
        if closed {
            path.pop();
        }
        (path, closed)
    };

    for &p in &order {
        if degree(p) == 2 {
            continue;
        }
        for &q in &adj[&p] {
            if used.contains(&key(p, q)) {
                continue;
            }
            let (path, closed) = walk(p, q, &mut used);
            chains.push((path, closed));
        }
    }
    // remaining cycles made only of degree-2 pixels
    for &p in &order {
        if degree(p) != 2 {
            continue;
        }
        if let Some(&q) = adj[&p].iter().find(|&&q| !used.contains(&key(p, q))) {
            let (path, closed) = walk(p, q, &mut used);
            chains.push((path, closed));
        }
    }

    chains
        .into_iter()
        .filter(|(path, _)| path.len() >= min_len)
        .map(|(path, closed)| EdgeChain { pixels: path.into_iter().map(to_xy).collect(), closed })
        .collect()
}

/// Canny edge chains of `img`; `low`/`high` are fractions of the peak gradient.
pub fn canny_edges(img: &GrayImage, low: f64, high: f64, sigma: f64) -> Vec<EdgeChain> {
    let map = canny_edge_map(img, low, high, sigma);
    trace_chains(&map, img.width(), img.height(), CannyParams::default().min_chain)
}

fn canny_chains_with(img: &GrayImage, p: &CannyParams) -> Vec<EdgeChain> {
    let map = canny_edge_map(img, p.low, p.high, p.sigma);
    trace_chains(&map, img.width(), img.height(), p.min_chain)
}

// ---------------------------------------------------------------------------
// PCA thinning

/// `lambda_min / lambda_max` of the 2x2 covariance of `pts`.
pub fn covariance_ratio(pts: &[Point2]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.x).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.y).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in pts {
        let (dx, dy) = (p.x - mx, p.y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let half_tr = 0.5 * (sxx + syy);
    let disc = (0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy).sqrt();
    let (l_max, l_min) = (half_tr + disc, (half_tr - disc).max(0.0));
    if l_max <= 0.0 {
        0.0
    } else {
        l_min / l_max
    }
}

fn window_points(pts: &[Point2], i: usize, half: usize, closed: bool) -> Vec<Point2> {
    let n = pts.len();
    if closed {
        if n <= 2 * half + 1 {
            return pts.to_vec();
        }
        (0..=2 * half).map(|k| pts[(i + n + k - half) % n]).collect()
    } else {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n - 1);
        pts[lo..=hi].to_vec()
    }
}

/// Thins each chain to points spaced by a curvature-dependent arc length.
///
/// Returns the kept points and, per input chain, the indices of its kept
/// points in order (closed chains repeat their first index at the end).
pub fn pca_thin(chains: &[EdgeChain], params: &PcaParams) -> (Vec<Point2>, Vec<Vec<usize>>) {
    let half = params.window / 2;
    let mut points = Vec::new();
    let mut out_chains = Vec::new();
    for chain in chains {
        let pts: Vec<Point2> = chain.pixels.iter().map(|&(x, y)| Point2::new(x as f64, y as f64)).collect();
        let n = pts.len();
        if n == 0 {
            continue;
        }
        let spacing: Vec<f64> = (0..n)
            .map(|i| {
                let mu = covariance_ratio(&window_points(&pts, i, half, chain.closed));
                let t = (mu / params.anisotropy_threshold).clamp(0.0, 1.0);
                params.sparse_spacing + (params.dense_spacing - params.sparse_spacing) * t
            })
            .collect();

        let mut kept = vec![0usize];
        let mut arc = 0.0;
        for i in 1..n {
            arc += pts[i - 1].dist(pts[i]);
            if arc >= spacing[i] {
                kept.push(i);
                arc = 0.0;
            }
        }
        let closed = chain.closed && n >= 3;
        if closed {
            let gap = arc + pts[n - 1].dist(pts[0]);
            if kept.len() > 3 && gap < 0.5 * spacing[0] {
                kept.pop();
            }
        } else if *kept.last().unwrap() != n - 1 {
            if kept.len() > 1 && arc < 0.5 * spacing[n - 1] {
                kept.pop();
            }
            kept.push(n - 1);
        }

        let base = points.len();
        points.extend(kept.iter().map(|&i| pts[i]));
        let mut ids: Vec<usize> = (base..base + kept.len()).collect();
        if closed && kept.len() >= 3 {
            ids.push(base);
        }
        out_chains.push(ids);
    }
    (points, out_chains)
}

// ---------------------------------------------------------------------------
// Halftoning

/// `|LoG|` of the image normalized to `[0, 1]`.
pub fn halftone_density(img: &GrayImage, sigma: f64) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let smooth = gaussian_blur(img.data(), w, h, sigma);
    let mut d: Vec<f64> = laplacian(&smooth, w, h).into_iter().map(f64::abs).collect();
    let max = d.iter().cloned().fold(0.0, f64::max);
    if max <= 1e-9 {
        return vec![0.0; w * h];
    }
    d.iter_mut().for_each(|v| *v /= max);
    d
}

/// Serpentine Floyd–Steinberg on a `[0, 1]` density; returns set pixels.
pub fn error_diffuse(density: &[f64], width: usize, height: usize) -> Vec<(usize, usize)> {
    let mut buf = density.to_vec();
    let mut out = Vec::new();
    for y in 0..height {
        let ltr = y % 2 == 0;
        for k in 0..width {
            let x = if ltr { k } else { width - 1 - k };
            let i = y * width + x;
            let old = buf[i];
            let new = if old >= 0.5 { 1.0 } else { 0.0 };
            if new == 1.0 {
                out.push((x, y));
            }
            let err = old - new;
            let fwd: isize = if ltr { 1 } else { -1 };
            let mut spread = |dx: isize, dy: usize, wgt: f64| {
                let nx = x as isize + dx;
                let ny = y + dy;
                if nx >= 0 && (nx as usize) < width && ny < height {
                    buf[ny * width + nx as usize] += err * wgt;
                }
            };
            spread(fwd, 0, 7.0 / 16.0);
            spread(-fwd, 1, 3.0 / 16.0);
            spread(0, 1, 5.0 / 16.0);
            spread(fwd, 1, 1.0 / 16.0);
        }
    }
    out
}

/// Error-diffusion sample points whose count tracks `target_fraction` of the
/// pixel count.
pub fn halftone_points(img: &GrayImage, target_fraction: f64, sigma: f64) -> Vec<Point2> {
    let (w, h) = (img.width(), img.height());
    let d = halftone_density(img, sigma);
    let sum: f64 = d.iter().sum();
    if sum <= 0.0 {
        return Vec::new();
    }
    let target = target_fraction * (w * h) as f64;
    let mut scale = target / sum;
    for _ in 0..50 {
        let s: f64 = d.iter().map(|v| (v * scale).min(1.0)).sum();
        if s <= 0.0 || ((s - target) / target).abs() < 1e-4 {
            break;
        }
        let next = scale * target / s;
        if next == scale {
            break;
        }
        scale = next;
    }
    let scaled: Vec<f64> = d.iter().map(|v| (v * scale).min(1.0)).collect();
    error_diffuse(&scaled, w, h).into_iter().map(|(x, y)| Point2::new(x as f64, y as f64)).collect()
}

// ---------------------------------------------------------------------------
// Uniform fill

/// Bucketed point set for radius queries.
#[derive(Debug, Clone)]
pub struct PointGrid {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    points: Vec<Point2>,
}

impl PointGrid {
    pub fn new(cell: f64) -> Self {
        Self { cell: cell.max(1e-6), buckets: HashMap::new(), points: Vec::new() }
    }

    fn key(&self, p: Point2) -> (i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64)
    }

    pub fn insert(&mut self, p: Point2) -> usize {
        let id = self.points.len();
        let k = self.key(p);
        self.buckets.entry(k).or_default().push(id);
        self.points.push(p);
        id
    }

    /// Closest stored point with distance `<= radius`.
    pub fn nearest_within(&self, p: Point2, radius: f64) -> Option<usize> {
        let r = (radius / self.cell).ceil() as i64;
        let (kx, ky) = self.key(p);
        let mut best: Option<(f64, usize)> = None;
        for dy in -r..=r {
            for dx in -r..=r {
                if let Some(ids) = self.buckets.get(&(kx + dx, ky + dy)) {
                    for &id in ids {
                        let d2 = self.points[id].dist2(p);
                        if d2 <= radius * radius && best.is_none_or(|(b, bid)| d2 < b || (d2 == b && id < bid)) {
                            best = Some((d2, id));
                        }
                    }
                }
            }
        }
        best.map(|(_, id)| id)
    }

    pub fn any_within(&self, p: Point2, radius: f64) -> bool {
        self.nearest_within(p, radius).is_some()
    }
}

fn grid_axis(extent: usize, spacing: f64) -> Vec<f64> {
    if extent <= 1 {
        return vec![0.0];
    }
    let span = (extent - 1) as f64;
    let n = (span / spacing).ceil().max(1.0) as usize + 1;
    let pitch = span / (n - 1) as f64;
    (0..n).map(|k| if k == n - 1 { span } else { k as f64 * pitch }).collect()
}

/// The four image corners (fewer for one-pixel-wide images).
pub fn image_corners(width: usize, height: usize) -> Vec<Point2> {
    let (xr, yb) = (width.saturating_sub(1) as f64, height.saturating_sub(1) as f64);
    let mut out = vec![Point2::new(0.0, 0.0)];
    for c in [Point2::new(xr, 0.0), Point2::new(0.0, yb), Point2::new(xr, yb)] {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Grid points with pitch at most `spacing` spanning the image, kept where no
/// `existing` point is within `spacing`. Corners are always emitted unless an
/// existing point sits on them.
pub fn uniform_points(img: &GrayImage, existing: &[Point2], spacing: f64) -> Vec<Point2> {
    let (w, h) = (img.width(), img.height());
    if w == 0 || h == 0 {
        return Vec::new();
    }
    let mut grid = PointGrid::new(spacing);
    for &p in existing {
        grid.insert(p);
    }
    let corners = image_corners(w, h);
    let xs = grid_axis(w, spacing);
    let ys = grid_axis(h, spacing);
    let mut out = Vec::new();
    for &y in &ys {
        for &x in &xs {
            let p = Point2::new(x, y);
            let keep = if corners.contains(&p) { !grid.any_within(p, 0.0) } else { !grid.any_within(p, spacing) };
            if keep {
                out.push(p);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Composition

/// Runs the three samplers and enforces `min_separation` across the result.
///
/// Canny points are merged into an earlier canny point within
/// `min_separation` (the chain is rerouted through it); halftone and uniform
/// points near any accepted point are dropped. Corners are reserved first.
pub fn build_samples(img: &GrayImage, cfg: &SamplingConfig) -> SamplePointSet {
    let (w, h) = (img.width(), img.height());
    let mut set = SamplePointSet::default();
    if w == 0 || h == 0 {
        return set;
    }
    let sep = cfg.min_separation;
    let corners = image_corners(w, h);
    let mut corner_grid = PointGrid::new(sep.max(1.0));
    for &c in &corners {
        corner_grid.insert(c);
    }

    let chains = canny_chains_with(img, &cfg.canny);
    let (cpts, cchains) = pca_thin(&chains, &cfg.pca);
    let mut canny_grid = PointGrid::new(sep.max(1.0));
    let mut canny: Vec<Point2> = Vec::new();
    for chain in &cchains {
        let mut cur: Vec<usize> = Vec::new();
        for &idx in chain {
            let p = cpts[idx];
            if corner_grid.any_within(p, sep) {
                if cur.len() >= 2 {
                    set.edge_chains.push(std::mem::take(&mut cur));
                }
                cur.clear();
                continue;
            }
            let id = match canny_grid.nearest_within(p, sep) {
                Some(id) => id,
                None => {
                    canny.push(p);
                    canny_grid.insert(p)
                }
            };
            if cur.last() != Some(&id) {
                cur.push(id);
            }
        }
        if cur.len() >= 2 {
            set.edge_chains.push(cur);
        }
    }

    let mut accepted = PointGrid::new(sep.max(1.0));
    for &p in canny.iter().chain(&corners) {
        accepted.insert(p);
    }
    let mut halftone = Vec::new();
    for p in halftone_points(img, cfg.halftone_fraction, cfg.halftone_sigma) {
        if !accepted.any_within(p, sep) {
            accepted.insert(p);
            halftone.push(p);
        }
    }

    let existing: Vec<Point2> = canny.iter().chain(&halftone).copied().collect();
    let mut uniform = Vec::new();
    for p in uniform_points(img, &existing, cfg.uniform_spacing) {
        if corners.contains(&p) {
            uniform.push(p);
        } else if !accepted.any_within(p, sep) {
            accepted.insert(p);
            uniform.push(p);
        }
    }
    // a corner coinciding with an existing point is not re-emitted by the grid
    for &c in &corners {
        if !uniform.contains(&c) && !existing.contains(&c) {
            uniform.push(c);
        }
    }

    set.points.extend(canny.into_iter().map(|pos| SamplePoint { pos, kind: SampleKind::Canny }));
    set.points.extend(halftone.into_iter().map(|pos| SamplePoint { pos, kind: SampleKind::Halftone }));
    set.points.extend(uniform.into_iter().map(|pos| SamplePoint { pos, kind: SampleKind::Uniform }));
    set
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_image(w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |x, _| if x < w / 2 { 0.0 } else { 255.0 })
    }

    fn disk_image() -> GrayImage {
        GrayImage::from_fn(64, 64, |x, y| {
            let (dx, dy) = (x as f64 - 32.0, y as f64 - 32.0);
            if dx * dx + dy * dy <= 400.0 {
                255.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn constant_image_has_no_edges() {
        let img = GrayImage::filled(32, 32, 90.0);
        assert!(canny_edges(&img, 0.1, 0.25, 1.4).is_empty());
    }

    #[test]
    fn step_image_yields_one_vertical_chain() {
        let img = step_image(32, 32);
        let chains = canny_edges(&img, 0.1, 0.25, 1.4);
        assert_eq!(chains.len(), 1, "{chains:?}");
        let c = &chains[0];
        assert!(c.len() >= 28, "len {}", c.len());
        // brute-force oracle: the column of maximal horizontal difference
        let xs: HashSet<usize> = c.pixels.iter().map(|p| p.0).collect();
        assert_eq!(xs.len(), 1);
        let col = *xs.iter().next().unwrap();
        assert!(col == 15 || col == 16, "column {col}");
    }

    #[test]
    fn disk_yields_one_closed_chain_on_circle() {
        let chains = canny_edges(&disk_image(), 0.1, 0.25, 1.4);
        assert_eq!(chains.len(), 1, "{} chains", chains.len());
        assert!(chains[0].closed);
        for &(x, y) in &chains[0].pixels {
            let r = ((x as f64 - 32.0).powi(2) + (y as f64 - 32.0).powi(2)).sqrt();
            assert!((r - 20.0).abs() <= 1.5, "pixel ({x},{y}) at radius {r}");
        }
    }

    fn line_chain(n: usize) -> EdgeChain {
        EdgeChain { pixels: (0..n).map(|x| (x, 5)).collect(), closed: false }
    }

    #[test]
    fn straight_chain_is_evenly_thinned() {
        let params = PcaParams { window: 11, dense_spacing: 3.0, sparse_spacing: 10.0, anisotropy_threshold: 0.25 };
        let (pts, chains) = pca_thin(&[line_chain(100)], &params);
        assert_eq!(pts.len(), 11);
        assert_eq!(chains[0].len(), 11);
        for w in pts.windows(2).take(9) {
            assert_eq!(w[1].x - w[0].x, 10.0);
        }
        assert_eq!(pts.last().unwrap().x, 99.0);
    }

    #[test]
    fn corner_is_sampled_more_densely() {
        // L-shaped chain: 40 px along x, then 40 px along y
        let mut pixels: Vec<(usize, usize)> = (0..40).map(|x| (x, 0)).collect();
        pixels.extend((1..40).map(|y| (39, y)));
        let chain = EdgeChain { pixels, closed: false };
        let params = PcaParams::default();
        let (pts, _) = pca_thin(&[chain], &params);
        let corner = Point2::new(39.0, 0.0);
        let near = pts.iter().filter(|p| p.dist(corner) <= 5.0).count() as f64 / 10.0;
        let arm = pts.iter().filter(|p| p.y == 0.0 && p.x >= 5.0 && p.x <= 25.0).count() as f64 / 20.0;
        assert!(near >= arm, "corner density {near} < arm density {arm}");
        // covariance-ratio oracle
        let corner_win: Vec<Point2> = (34..=44)
            .map(|i| if i < 40 { Point2::new(i as f64, 0.0) } else { Point2::new(39.0, (i - 39) as f64) })
            .collect();
        let arm_win: Vec<Point2> = (10..=20).map(|x| Point2::new(x as f64, 0.0)).collect();
        assert!(covariance_ratio(&corner_win) > params.anisotropy_threshold);
        assert_eq!(covariance_ratio(&arm_win), 0.0);
    }

    #[test]
    fn empty_chain_list_thins_to_nothing() {
        let (pts, chains) = pca_thin(&[], &PcaParams::default());
        assert!(pts.is_empty() && chains.is_empty());
    }

    #[test]
    fn constant_image_has_no_halftone_points() {
        assert!(halftone_points(&GrayImage::filled(40, 40, 12.0), 0.05, 1.0).is_empty());
    }

    #[test]
    fn halftone_points_gather_at_step() {
        let img = step_image(64, 64);
        let pts = halftone_points(&img, 0.05, 1.0);
        assert!(!pts.is_empty());
        // |LoG| oracle: nonzero only around columns 31/32
        let near = pts.iter().filter(|p| (p.x - 31.5).abs() <= 3.0).count();
        assert!(near as f64 >= 0.8 * pts.len() as f64, "{near} of {}", pts.len());
    }

    #[test]
    fn halftone_count_tracks_target() {
        let img = GrayImage::from_fn(256, 256, |x, y| {
            let (fx, fy) = (x as f64 / 13.0, y as f64 / 7.0);
            127.0 + 60.0 * fx.sin() * fy.cos() + 40.0 * ((x * y) as f64 / 300.0).sin()
        });
        let n = halftone_points(&img, 0.02, 1.0).len();
        assert!((1311 - 197..=1311 + 197).contains(&n), "count {n}");
    }

    #[test]
    fn halftone_is_deterministic() {
        let img = disk_image();
        assert_eq!(halftone_points(&img, 0.05, 1.0), halftone_points(&img, 0.05, 1.0));
    }

    #[test]
    fn uniform_grid_on_empty_image() {
        let img = GrayImage::filled(100, 100, 0.0);
        let pts = uniform_points(&img, &[], 25.0);
        assert_eq!(pts.len(), 25);
        for c in image_corners(100, 100) {
            assert!(pts.contains(&c));
        }
    }

    #[test]
    fn uniform_grid_fully_covered() {
        let img = GrayImage::filled(100, 100, 0.0);
        let grid = uniform_points(&img, &[], 25.0);
        // every grid site occupied, corners included -> nothing new
        assert!(uniform_points(&img, &grid, 25.0).is_empty());
        // corners left uncovered -> only corners come back
        let corners = image_corners(100, 100);
        let inner: Vec<Point2> = grid.iter().copied().filter(|p| !corners.contains(p)).collect();
        let again = uniform_points(&img, &inner, 25.0);
        assert_eq!(again.len(), 4);
        assert!(again.iter().all(|p| corners.contains(p)));
    }

    #[test]
    fn uniform_grid_around_center_point() {
        let img = GrayImage::filled(100, 100, 0.0);
        let center = Point2::new(49.5, 49.5);
        let all = uniform_points(&img, &[], 25.0);
        let expected: Vec<Point2> = all.iter().copied().filter(|p| p.dist(center) > 25.0).collect();
        assert_eq!(uniform_points(&img, &[center], 25.0), expected);
    }

    #[test]
    fn uniform_is_order_independent() {
        let img = GrayImage::filled(80, 60, 0.0);
        let mut existing = vec![Point2::new(10.0, 10.0), Point2::new(40.0, 33.0), Point2::new(70.0, 5.0)];
        let a = uniform_points(&img, &existing, 9.0);
        existing.reverse();
        assert_eq!(a, uniform_points(&img, &existing, 9.0));
    }

    fn check_invariants(set: &SamplePointSet, w: usize, h: usize, sep: f64) {
        for (i, a) in set.points.iter().enumerate() {
            assert!(a.pos.x >= 0.0 && a.pos.y >= 0.0 && a.pos.x <= (w - 1) as f64 && a.pos.y <= (h - 1) as f64);
            for b in &set.points[i + 1..] {
                assert!(a.pos.dist(b.pos) >= sep, "{:?} vs {:?}", a, b);
            }
        }
        for chain in &set.edge_chains {
            for &i in chain {
                assert_eq!(set.points[i].kind, SampleKind::Canny);
            }
        }
    }

    #[test]
    fn constant_image_samples_are_grid_plus_corners() {
        let img = GrayImage::filled(64, 64, 50.0);
        let cfg = SamplingConfig::default();
        let set = build_samples(&img, &cfg);
        assert_eq!(set.count(SampleKind::Canny), 0);
        assert_eq!(set.count(SampleKind::Halftone), 0);
        assert_eq!(set.positions(), uniform_points(&img, &[], cfg.uniform_spacing));
        check_invariants(&set, 64, 64, cfg.min_separation);
    }

    #[test]
    fn step_image_samples_by_region() {
        let img = step_image(64, 64);
        let cfg = SamplingConfig::default();
        let set = build_samples(&img, &cfg);
        check_invariants(&set, 64, 64, cfg.min_separation);
        assert!(set.count(SampleKind::Canny) >= 5);
        assert_eq!(set.edge_chains.len(), 1);
        for p in set.points.iter().filter(|p| p.kind == SampleKind::Canny) {
            assert!((p.pos.x - 31.5).abs() <= 1.0);
        }
        for p in set.points.iter().filter(|p| p.kind == SampleKind::Halftone) {
            assert!((p.pos.x - 31.5).abs() <= 4.0, "halftone at {:?}", p.pos);
        }
        assert!(set.points.iter().any(|p| p.kind == SampleKind::Uniform && (p.pos.x - 31.5).abs() > 10.0));
    }

    #[test]
    fn canny_points_lie_on_detected_pixels() {
        let img = disk_image();
        let cfg = SamplingConfig::default();
        let set = build_samples(&img, &cfg);
        check_invariants(&set, 64, 64, cfg.min_separation);
        let map = canny_edge_map(&img, cfg.canny.low, cfg.canny.high, cfg.canny.sigma);
        for p in set.points.iter().filter(|p| p.kind == SampleKind::Canny) {
            let hit = (0..64 * 64).any(|i| map[i] && Point2::new((i % 64) as f64, (i / 64) as f64).dist(p.pos) <= 1.0);
            assert!(hit, "{:?}", p.pos);
        }
    }
}
