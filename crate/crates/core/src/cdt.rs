//! Constrained Delaunay triangulation.
//!
//! Points are inserted one at a time with Bowyer–Watson cavity
//! retriangulation. The exterior is closed with "ghost" triangles that share a
//! vertex at infinity, which removes the need for a bounding super-triangle
//! and keeps the hull exact. Cocircular ties are then canonicalized so that
//! every cocircular quadrilateral uses the diagonal with the lexicographically
//! smallest vertex pair.
//!
//! Constraint segments are recovered by flipping the edges they cross (Sloan's
//! method) and the flipped region is re-legalized afterwards, giving a CDT.
//! All orientation and in-circle decisions use adaptive exact predicates.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::geometry::{in_triangle, incircle, orient2d, segment_dist2, segments_cross, strictly_between, Point2};
use crate::mesh::{undirected, MeshError, TriMesh};

/// Vertex index standing for the point at infinity.
const GHOST: usize = usize::MAX;
const NONE: usize = usize::MAX;

/// Squared distance under which a query point counts as lying on an edge.
pub const ON_EDGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum CdtError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("all points are collinear")]
    AllCollinear,
    #[error("point {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("point {index} duplicates point {existing}")]
    DuplicatePoint { index: usize, existing: usize },
    #[error("invalid constraint ({0}, {1})")]
    InvalidConstraint(usize, usize),
    #[error("constraint ({}, {}) properly intersects constraint ({}, {})", new[0], new[1], existing[0], existing[1])]
    ConstraintsIntersect { existing: [usize; 2], new: [usize; 2] },
    #[error("point ({x}, {y}) lies outside the triangulated hull")]
    OutsideHull { x: f64, y: f64 },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// A segment between two vertex indices that must appear as mesh edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Constraint {
    pub a: usize,
    pub b: usize,
}

impl Constraint {
    pub fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }
}

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [usize; 3],
    /// `n[i]` is the triangle across the edge opposite `v[i]`.
    n: [usize; 3],
}

impl Tri {
    fn is_ghost(&self) -> bool {
        self.v.contains(&GHOST)
    }

    fn index_of(&self, vertex: usize) -> usize {
        self.v.iter().position(|&x| x == vertex).expect("vertex not in triangle")
    }

    fn slot_of(&self, nb: usize) -> usize {
        self.n.iter().position(|&x| x == nb).expect("triangles are not adjacent")
    }
}

enum Walk {
    Exists,
    Vertex(usize),
    Edges(Vec<(usize, usize)>),
}

/// Incremental constrained Delaunay triangulation.
#[derive(Debug, Clone)]
pub struct Cdt {
    pts: Vec<Point2>,
    tris: Vec<Tri>,
    alive: Vec<bool>,
    free: Vec<usize>,
    vert_tri: Vec<usize>,
    mark: Vec<u32>,
    stamp: u32,
    constrained: HashMap<(usize, usize), [usize; 2]>,
    constraint_edges: Vec<[usize; 2]>,
    last: usize,
}

impl Cdt {
    /// Delaunay triangulation of `points`, inserted in index order.
    pub fn new(points: &[Point2]) -> Result<Self, CdtError> {
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(CdtError::NonFinite(i));
        }
        if points.len() < 3 {
            return Err(CdtError::TooFewPoints(points.len()));
        }
        let p0 = points[0];
        let i1 = points.iter().position(|&p| p != p0).ok_or(CdtError::AllCollinear)?;
        let i2 =
            (0..points.len()).find(|&i| orient2d(p0, points[i1], points[i]) != 0.0).ok_or(CdtError::AllCollinear)?;
        let (b, c) = if orient2d(p0, points[i1], points[i2]) > 0.0 { (i1, i2) } else { (i2, i1) };

        let mut cdt = Cdt {
            pts: points.to_vec(),
            tris: Vec::new(),
            alive: Vec::new(),
            free: Vec::new(),
            vert_tri: vec![NONE; points.len()],
            mark: Vec::new(),
            stamp: 0,
            constrained: HashMap::new(),
            constraint_edges: Vec::new(),
            last: 0,
        };
        let a = 0;
        cdt.alloc([a, b, c]);
        cdt.alloc([b, a, GHOST]);
        cdt.alloc([c, b, GHOST]);
        cdt.alloc([a, c, GHOST]);
        cdt.link_all();
        for i in 1..points.len() {
            if i != i1 && i != i2 {
                cdt.insert_point(i)?;
            }
        }
        cdt.canonicalize_ties();
        Ok(cdt)
    }

    /// Rebuilds the triangulation structure of an existing mesh.
    pub fn from_mesh(mesh: &TriMesh) -> Result<Self, CdtError> {
        let mut cdt = Cdt {
            pts: mesh.vertices.clone(),
            tris: Vec::new(),
            alive: Vec::new(),
            free: Vec::new(),
            vert_tri: vec![NONE; mesh.vertices.len()],
            mark: Vec::new(),
            stamp: 0,
            constrained: HashMap::new(),
            constraint_edges: Vec::new(),
            last: 0,
        };
        let mut directed = HashMap::new();
        for &t in &mesh.triangles {
            cdt.alloc(t);
            for k in 0..3 {
                directed.insert((t[k], t[(k + 1) % 3]), ());
            }
        }
        let boundary: Vec<(usize, usize)> =
            directed.keys().filter(|(a, b)| !directed.contains_key(&(*b, *a))).copied().collect();
        for (a, b) in boundary {
            cdt.alloc([b, a, GHOST]);
        }
        cdt.link_all();
        for &[a, b] in &mesh.constrained_edges {
            cdt.mark_constrained(a, b, [a, b]);
        }
        Ok(cdt)
    }

    pub fn points(&self) -> &[Point2] {
        &self.pts
    }

    fn alloc(&mut self, v: [usize; 3]) -> usize {
        let tri = Tri { v, n: [NONE; 3] };
        let id = if let Some(id) = self.free.pop() {
            self.tris[id] = tri;
            self.alive[id] = true;
            id
        } else {
            self.tris.push(tri);
            self.alive.push(true);
            self.mark.push(0);
            self.tris.len() - 1
        };
        for &x in &v {
            if x != GHOST {
                self.vert_tri[x] = id;
            }
        }
        if !tri.is_ghost() {
            self.last = id;
        }
        id
    }

    fn release(&mut self, id: usize) {
        self.alive[id] = false;
        self.free.push(id);
    }

    fn link_all(&mut self) {
        let mut by_edge: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for t in 0..self.tris.len() {
            if !self.alive[t] {
                continue;
            }
            let v = self.tris[t].v;
            for i in 0..3 {
                by_edge.insert((v[(i + 1) % 3], v[(i + 2) % 3]), (t, i));
            }
        }
        for t in 0..self.tris.len() {
            if !self.alive[t] {
                continue;
            }
            let v = self.tris[t].v;
            for i in 0..3 {
                if let Some(&(nb, _)) = by_edge.get(&(v[(i + 2) % 3], v[(i + 1) % 3])) {
                    self.tris[t].n[i] = nb;
                }
            }
        }
    }

    fn p(&self, v: usize) -> Point2 {
        self.pts[v]
    }

    fn ghost_edge(&self, t: usize) -> (usize, usize) {
        let tri = &self.tris[t];
        let k = tri.index_of(GHOST);
        (tri.v[(k + 1) % 3], tri.v[(k + 2) % 3])
    }

    fn conflicts(&self, t: usize, p: Point2) -> bool {
        let tri = &self.tris[t];
        if tri.is_ghost() {
            let (a, b) = self.ghost_edge(t);
            let o = orient2d(self.p(a), self.p(b), p);
            o > 0.0 || (o == 0.0 && strictly_between(p, self.p(a), self.p(b)))
        } else {
            let [a, b, c] = tri.v;
            incircle(self.p(a), self.p(b), self.p(c), p) > 0.0
        }
    }

    /// A real triangle containing `p`, or a ghost whose hull edge sees `p`.
    fn walk_to(&self, p: Point2) -> usize {
        let mut t = self.last;
        if !self.alive[t] {
            t = (0..self.tris.len()).find(|&i| self.alive[i]).expect("empty triangulation");
        }
        if self.tris[t].is_ghost() {
            let k = self.tris[t].index_of(GHOST);
            t = self.tris[t].n[k];
        }
        let mut prev = NONE;
        let limit = 4 * self.tris.len() + 64;
        for step in 0..limit {
            let tri = self.tris[t];
            let mut next = None;
            for k in 0..3 {
                let i = (step + k) % 3;
                let nb = tri.n[i];
                if nb == prev {
                    continue;
                }
                let (a, b) = (tri.v[(i + 1) % 3], tri.v[(i + 2) % 3]);
                if orient2d(self.p(a), self.p(b), p) < 0.0 {
                    next = Some(nb);
                    break;
                }
            }
            match next {
                None => return t,
                Some(nb) if self.tris[nb].is_ghost() => return nb,
                Some(nb) => {
                    prev = t;
                    t = nb;
                }
            }
        }
        // exhaustive fallback; not reached on Delaunay triangulations
        (0..self.tris.len())
            .filter(|&i| self.alive[i])
            .find(|&i| {
                let tri = &self.tris[i];
                if tri.is_ghost() {
                    let (a, b) = self.ghost_edge(i);
                    orient2d(self.p(a), self.p(b), p) > 0.0
                } else {
                    let [a, b, c] = tri.v;
                    in_triangle(p, self.p(a), self.p(b), self.p(c))
                }
            })
            .expect("point location failed")
    }

    fn insert_point(&mut self, pi: usize) -> Result<(), CdtError> {
        let p = self.p(pi);
        let t0 = self.walk_to(p);
        for &v in &self.tris[t0].v {
            if v != GHOST && self.p(v) == p {
                return Err(CdtError::DuplicatePoint { index: pi, existing: v });
            }
        }
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.stamp = 1;
        }
        let stamp = self.stamp;
        let mut cavity = vec![t0];
        self.mark[t0] = stamp;
        let mut stack = vec![t0];
        while let Some(t) = stack.pop() {
            for i in 0..3 {
                let nb = self.tris[t].n[i];
                if self.mark[nb] == stamp {
                    continue;
                }
                if self.conflicts(nb, p) {
                    self.mark[nb] = stamp;
                    cavity.push(nb);
                    stack.push(nb);
                }
            }
        }

        let mut created = Vec::with_capacity(cavity.len() + 2);
        for &t in &cavity {
            for i in 0..3 {
                let nb = self.tris[t].n[i];
                if self.mark[nb] == stamp {
                    continue;
                }
                let v = self.tris[t].v;
                let (a, b) = (v[(i + 1) % 3], v[(i + 2) % 3]);
                let nt = self.alloc([a, b, pi]);
                self.tris[nt].n[2] = nb;
                let s = self.tris[nb].slot_of(t);
                self.tris[nb].n[s] = nt;
                created.push(nt);
            }
        }
        let first_of: HashMap<usize, usize> = created.iter().map(|&t| (self.tris[t].v[0], t)).collect();
        let second_of: HashMap<usize, usize> = created.iter().map(|&t| (self.tris[t].v[1], t)).collect();
        for &t in &created {
            let [a, b, _] = self.tris[t].v;
            self.tris[t].n[0] = first_of[&b];
            self.tris[t].n[1] = second_of[&a];
        }
        for t in cavity {
            self.release(t);
        }
        if let Some(&t) = created.iter().find(|&&t| !self.tris[t].is_ghost()) {
            self.last = t;
        }
        Ok(())
    }

    /// Flips the edge opposite `v[i]` of `t1`; the new edge joins the two
    /// opposite vertices.
    fn flip(&mut self, t1: usize, i: usize) {
        let a = self.tris[t1];
        let (v1, p, q) = (a.v[i], a.v[(i + 1) % 3], a.v[(i + 2) % 3]);
        let t2 = a.n[i];
        let b = self.tris[t2];
        let j = b.slot_of(t1);
        let v2 = b.v[j];
        let n_qv1 = a.n[(i + 1) % 3];
        let n_v1p = a.n[(i + 2) % 3];
        let n_pv2 = b.n[(j + 1) % 3];
        let n_v2q = b.n[(j + 2) % 3];
        self.tris[t1] = Tri { v: [v1, p, v2], n: [n_pv2, t2, n_v1p] };
        self.tris[t2] = Tri { v: [v2, q, v1], n: [n_qv1, t1, n_v2q] };
        let s = self.tris[n_pv2].slot_of(t2);
        self.tris[n_pv2].n[s] = t1;
        let s = self.tris[n_qv1].slot_of(t1);
        self.tris[n_qv1].n[s] = t2;
        self.vert_tri[v1] = t1;
        self.vert_tri[p] = t1;
        self.vert_tri[v2] = t2;
        self.vert_tri[q] = t2;
    }

    fn opposite(&self, t: usize, i: usize) -> usize {
        let nb = self.tris[t].n[i];
        let s = self.tris[nb].slot_of(t);
        self.tris[nb].v[s]
    }

    fn canonicalize_ties(&mut self) {
        loop {
            let mut changed = false;
            for t in 0..self.tris.len() {
                if !self.alive[t] || self.tris[t].is_ghost() {
                    continue;
                }
                for i in 0..3 {
                    let tri = self.tris[t];
                    let nb = tri.n[i];
                    if nb < t || self.tris[nb].is_ghost() {
                        continue;
                    }
                    let d = self.opposite(t, i);
                    let [a, b, c] = tri.v;
                    if incircle(self.p(a), self.p(b), self.p(c), self.p(d)) != 0.0 {
                        continue;
                    }
                    let current = undirected(tri.v[(i + 1) % 3], tri.v[(i + 2) % 3]);
                    let other = undirected(tri.v[i], d);
                    if other < current {
                        self.flip(t, i);
                        changed = true;
                        break;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Triangles around vertex `v`, including ghosts.
    fn star(&self, v: usize) -> Vec<usize> {
        let start = self.vert_tri[v];
        let mut out = vec![start];
        let mut t = start;
        loop {
            let k = self.tris[t].index_of(v);
            t = self.tris[t].n[(k + 1) % 3];
            if t == start || t == NONE {
                break;
            }
            out.push(t);
        }
        out
    }

    /// Locates edge `{u, w}` as `(triangle, slot of the opposite vertex)`.
    fn find_edge(&self, u: usize, w: usize) -> Option<(usize, usize)> {
        for t in self.star(u) {
            let tri = &self.tris[t];
            let k = tri.index_of(u);
            if tri.v[(k + 1) % 3] == w {
                return Some((t, (k + 2) % 3));
            }
            if tri.v[(k + 2) % 3] == w {
                return Some((t, (k + 1) % 3));
            }
        }
        None
    }

    pub fn has_edge(&self, u: usize, w: usize) -> bool {
        self.find_edge(u, w).is_some()
    }

    fn walk_segment(&self, s: usize, e: usize) -> Walk {
        let (ps, pe) = (self.p(s), self.p(e));
        let mut entry = None;
        for t in self.star(s) {
            let tri = &self.tris[t];
            if tri.is_ghost() {
                continue;
            }
            let k = tri.index_of(s);
            let (u, w) = (tri.v[(k + 1) % 3], tri.v[(k + 2) % 3]);
            if u == e || w == e {
                return Walk::Exists;
            }
            let (ou, ow) = (orient2d(ps, pe, self.p(u)), orient2d(ps, pe, self.p(w)));
            for (x, o) in [(u, ou), (w, ow)] {
                if o == 0.0 && (self.p(x) - ps).dot(pe - ps) > 0.0 {
                    return Walk::Vertex(x);
                }
            }
            if ou < 0.0 && ow > 0.0 {
                entry = Some((t, k, w, u));
                break;
            }
        }
        let (mut t, k, mut left, mut right) = entry.expect("segment leaves the triangulation");
        let mut crossed = vec![(left, right)];
        let mut across = self.tris[t].n[k];
        loop {
            t = across;
            let tri = self.tris[t];
            let x = third_vertex(&tri, left, right);
            if x == e {
                return Walk::Edges(crossed);
            }
            let o = orient2d(ps, pe, self.p(x));
            if o == 0.0 {
                return Walk::Vertex(x);
            }
            if o > 0.0 {
                left = x;
            } else {
                right = x;
            }
            crossed.push((left, right));
            across = tri.n[tri.index_of(third_vertex(&tri, left, right))];
        }
    }

    fn mark_constrained(&mut self, a: usize, b: usize, origin: [usize; 2]) {
        if self.constrained.insert(undirected(a, b), origin).is_none() {
            self.constraint_edges.push([a, b]);
        }
    }

    pub fn is_constrained(&self, a: usize, b: usize) -> bool {
        self.constrained.contains_key(&undirected(a, b))
    }

    /// Forces segment `a-b` into the triangulation. Segments passing exactly
    /// through other vertices are split there. On error the triangulation is
    /// left unchanged.
    pub fn insert_constraint(&mut self, a: usize, b: usize) -> Result<(), CdtError> {
        let n = self.pts.len();
        if a == b || a >= n || b >= n {
            return Err(CdtError::InvalidConstraint(a, b));
        }
        // validate every piece before touching the triangulation
        let mut pieces = Vec::new();
        let mut pending = vec![(a, b)];
        while let Some((s, e)) = pending.pop() {
            match self.walk_segment(s, e) {
                Walk::Exists => pieces.push((s, e, Vec::new())),
                Walk::Vertex(v) => {
                    pending.push((v, e));
                    pending.push((s, v));
                }
                Walk::Edges(crossed) => {
                    for &(u, w) in &crossed {
                        if let Some(&existing) = self.constrained.get(&undirected(u, w)) {
                            return Err(CdtError::ConstraintsIntersect { existing, new: [a, b] });
                        }
                    }
                    pieces.push((s, e, crossed));
                }
            }
        }
        for (s, e, crossed) in pieces {
            if !crossed.is_empty() {
                self.recover_segment(s, e, crossed);
            }
            self.mark_constrained(s, e, [a, b]);
        }
        Ok(())
    }

    fn recover_segment(&mut self, s: usize, e: usize, crossed: Vec<(usize, usize)>) {
        let (ps, pe) = (self.p(s), self.p(e));
        let mut queue: VecDeque<(usize, usize)> = crossed.into();
        let mut created = Vec::new();
        while let Some((u, w)) = queue.pop_front() {
            let (t, i) = self.find_edge(u, w).expect("crossed edge vanished");
            let c = self.tris[t].v[i];
            let d = self.opposite(t, i);
            if segments_cross(self.p(c), self.p(d), self.p(u), self.p(w)) {
                self.flip(t, i);
                if (c == s || c == e || d == s || d == e) || !segments_cross(ps, pe, self.p(c), self.p(d)) {
                    created.push((c, d));
                } else {
                    queue.push_back((c, d));
                }
            } else {
                queue.push_back((u, w));
            }
        }
        // restore the Delaunay property away from the new constraint
        loop {
            let mut changed = false;
            for slot in created.iter_mut() {
                let (u, w) = *slot;
                if undirected(u, w) == undirected(s, e) || self.is_constrained(u, w) {
                    continue;
                }
                let Some((t, i)) = self.find_edge(u, w) else { continue };
                if self.tris[self.tris[t].n[i]].is_ghost() || self.tris[t].is_ghost() {
                    continue;
                }
                let d = self.opposite(t, i);
                let [a, b, c] = self.tris[t].v;
                if incircle(self.p(a), self.p(b), self.p(c), self.p(d)) > 0.0 {
                    let c_opp = self.tris[t].v[i];
                    self.flip(t, i);
                    *slot = (c_opp, d);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Real triangles in slot order plus the constrained edges.
    pub fn to_mesh(&self, width: usize, height: usize) -> Result<TriMesh, CdtError> {
        let triangles: Vec<[usize; 3]> = (0..self.tris.len())
            .filter(|&t| self.alive[t] && !self.tris[t].is_ghost())
            .map(|t| self.tris[t].v)
            .collect();
        Ok(TriMesh::new(width, height, self.pts.clone(), triangles, self.constraint_edges.clone())?)
    }
}

fn third_vertex(tri: &Tri, a: usize, b: usize) -> usize {
    *tri.v.iter().find(|&&y| y != a && y != b).unwrap()
}

/// Delaunay triangulation of `points` (no image frame attached).
pub fn delaunay(points: &[Point2]) -> Result<TriMesh, CdtError> {
    Cdt::new(points)?.to_mesh(0, 0)
}

/// Inserts `constraints` into a triangulation and returns the CDT.
pub fn constrain(mesh: &TriMesh, constraints: &[Constraint]) -> Result<TriMesh, CdtError> {
    if constraints.is_empty() {
        return Ok(mesh.clone());
    }
    let mut cdt = Cdt::from_mesh(mesh)?;
    for c in constraints {
        cdt.insert_constraint(c.a, c.b)?;
    }
    let mut out = cdt.to_mesh(mesh.width, mesh.height)?;
    if mesh.has_intensities() && out.triangles.len() == mesh.triangles.len() {
        out.center_intensity = mesh.center_intensity.clone();
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Point location

/// Walk-based point location over a finished mesh.
#[derive(Debug, Clone)]
pub struct Locator<'a> {
    mesh: &'a TriMesh,
    adj: Vec<[usize; 3]>,
    incident: Vec<Vec<usize>>,
}

impl<'a> Locator<'a> {
    pub fn new(mesh: &'a TriMesh) -> Self {
        let mut by_edge: HashMap<(usize, usize), usize> = HashMap::with_capacity(mesh.triangles.len() * 3);
        let mut incident = vec![Vec::new(); mesh.vertices.len()];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            for i in 0..3 {
                by_edge.insert((tri[(i + 1) % 3], tri[(i + 2) % 3]), t);
                incident[tri[i]].push(t);
            }
        }
        let adj = mesh
            .triangles
            .iter()
            .map(|tri| {
                let mut n = [NONE; 3];
                for (i, slot) in n.iter_mut().enumerate() {
                    if let Some(&nb) = by_edge.get(&(tri[(i + 2) % 3], tri[(i + 1) % 3])) {
                        *slot = nb;
                    }
                }
                n
            })
            .collect();
        Self { mesh, adj, incident }
    }

    pub fn mesh(&self) -> &TriMesh {
        self.mesh
    }

    /// Triangle across the edge opposite vertex slot `i`, if any.
    pub fn neighbor(&self, t: usize, i: usize) -> Option<usize> {
        let n = self.adj[t][i];
        (n != NONE).then_some(n)
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn locate(&self, p: Point2) -> Result<usize, CdtError> {
        self.locate_from(p, 0)
    }

    /// Remembering walk from `hint`. Points on shared edges or vertices (within
    /// [`ON_EDGE_TOLERANCE`]) resolve to the lowest-index incident triangle.
    pub fn locate_from(&self, p: Point2, hint: usize) -> Result<usize, CdtError> {
        let m = self.mesh;
        if m.triangles.is_empty() {
            return Err(CdtError::OutsideHull { x: p.x, y: p.y });
        }
        let mut t = hint.min(m.triangles.len() - 1);
        let mut prev = NONE;
        let limit = 4 * m.triangles.len() + 64;
        let mut found = None;
        for step in 0..limit {
            let tri = m.triangles[t];
            let mut next = None;
            let mut blocked = false;
            for k in 0..3 {
                let i = (step + k) % 3;
                let nb = self.adj[t][i];
                if nb == prev && nb != NONE {
                    continue;
                }
                let (a, b) = (m.vertices[tri[(i + 1) % 3]], m.vertices[tri[(i + 2) % 3]]);
                if orient2d(a, b, p) < 0.0 {
                    if nb == NONE {
                        blocked = true;
                        break;
                    }
                    next = Some(nb);
                    break;
                }
            }
            if blocked {
                break;
            }
            match next {
                None => {
                    found = Some(t);
                    break;
                }
                Some(nb) => {
                    prev = t;
                    t = nb;
                }
            }
        }
        let t = match found {
            Some(t) => t,
            None => (0..m.triangles.len())
                .find(|&t| {
                    let [a, b, c] = m.triangle_points(t);
                    in_triangle(p, a, b, c)
                })
                .ok_or(CdtError::OutsideHull { x: p.x, y: p.y })?,
        };
        Ok(self.resolve_tie(t, p))
    }

    fn resolve_tie(&self, t: usize, p: Point2) -> usize {
        let m = self.mesh;
        let tri = m.triangles[t];
        let mut best = t;
        for i in 0..3 {
            let v = tri[i];
            if m.vertices[v].dist2(p) <= ON_EDGE_TOLERANCE {
                if let Some(&lo) = self.incident[v].iter().min() {
                    best = best.min(lo);
                }
            }
            let (a, b) = (m.vertices[tri[(i + 1) % 3]], m.vertices[tri[(i + 2) % 3]]);
            if segment_dist2(p, a, b) <= ON_EDGE_TOLERANCE {
                if let Some(nb) = self.neighbor(t, i) {
                    best = best.min(nb);
                }
            }
        }
        best
    }
}

/// One-shot point location; builds a [`Locator`] internally.
pub fn locate(mesh: &TriMesh, p: Point2) -> Result<usize, CdtError> {
    Locator::new(mesh).locate(p)
}
