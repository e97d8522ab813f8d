//! Quadric error metrics.
//!
//! Two clients share the same machinery: [`refine_anchor`] moves each coarse
//! anchor vertex to the optimal collapse point of its cheapest incident edge
//! in the target mesh (the target is never modified), and [`simplify`] performs
//! greedy edge-collapse decimation to produce intra base meshes.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector4};

use crate::align::{AnchorMesh, AnchorStage};
use crate::{AdjacencyMap, Error, Mesh, Result, Vec3};

/// Faces with area at or below this are treated as planeless.
pub const DEGENERATE_AREA: f64 = 1e-12;

/// Largest condition number of the 3x3 block for which the direct solve is
/// trusted.
pub const MAX_CONDITION: f64 = 1e8;

/// Plane coefficients `(a, b, c, d)` of a face with unit normal.
pub fn face_plane(mesh: &Mesh, face: usize) -> Option<[f64; 4]> {
    let cross = mesh.face_cross(face);
    let len = cross.norm();
    if 0.5 * len <= DEGENERATE_AREA {
        return None;
    }
    let n = cross / len;
    let a = mesh.vertices[mesh.faces[face][0]];
    Some([n.x, n.y, n.z, -n.dot(&a)])
}

/// Symmetric 4x4 matrix accumulating plane outer products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadric(pub Matrix4<f64>);

impl Default for Quadric {
    fn default() -> Self {
        Quadric::zero()
    }
}

impl Quadric {
    pub fn zero() -> Self {
        Quadric(Matrix4::zeros())
    }

    pub fn from_plane(plane: [f64; 4]) -> Self {
        let r = Vector4::from(plane);
        Quadric(r * r.transpose())
    }

    /// `v~ᵀ Q v~` with `v~ = (x, y, z, 1)`.
    pub fn error(&self, p: &Vec3) -> f64 {
        let h = Vector4::new(p.x, p.y, p.z, 1.0);
        (h.transpose() * self.0 * h)[(0, 0)]
    }

    /// Sum of the diagonal of the 3x3 block; the number of unit planes summed.
    fn weight(&self) -> f64 {
        self.0[(0, 0)] + self.0[(1, 1)] + self.0[(2, 2)]
    }
}

impl std::ops::Add for Quadric {
    type Output = Quadric;

    fn add(self, rhs: Quadric) -> Quadric {
        Quadric(self.0 + rhs.0)
    }
}

impl std::ops::AddAssign for Quadric {
    fn add_assign(&mut self, rhs: Quadric) {
        self.0 += rhs.0;
    }
}

/// Sum of plane quadrics over the non-degenerate faces incident to `vertex`.
pub fn vertex_quadric(mesh: &Mesh, adj: &AdjacencyMap, vertex: usize) -> Quadric {
    adj.incident_faces(vertex)
        .iter()
        .filter_map(|&f| face_plane(mesh, f))
        .fold(Quadric::zero(), |acc, p| acc + Quadric::from_plane(p))
}

/// Quadrics of every vertex, computed in one pass over the faces.
pub fn vertex_quadrics(mesh: &Mesh) -> Vec<Quadric> {
    let mut qs = vec![Quadric::zero(); mesh.vertices.len()];
    for (fi, f) in mesh.faces.iter().enumerate() {
        if let Some(p) = face_plane(mesh, fi) {
            let q = Quadric::from_plane(p);
            qs[f[0]] += q;
            if f[1] != f[0] {
                qs[f[1]] += q;
            }
            if f[2] != f[0] && f[2] != f[1] {
                qs[f[2]] += q;
            }
        }
    }
    qs
}

pub fn edge_quadric(a: &Quadric, b: &Quadric) -> Quadric {
    *a + *b
}

fn tolerance(q: &Quadric, a: &Vec3, b: &Vec3) -> f64 {
    1e-12 * q.weight() * (a - b).norm_squared().max(f64::MIN_POSITIVE)
}

/// Minimizer of the edge quadric and its error.
///
/// The 3x3 stationarity system is solved directly when its condition number
/// is below [`MAX_CONDITION`]. Otherwise, and whenever the solve does not beat
/// them, the best of `a`, `b` and their midpoint is returned (earlier
/// candidates win ties).
pub fn optimal_position(q: &Quadric, a: &Vec3, b: &Vec3) -> (Vec3, f64) {
    let tol = tolerance(q, a, b);
    let mid = (a + b) * 0.5;
    let mut best = (*a, q.error(a).max(0.0));
    for c in [*b, mid] {
        let e = q.error(&c).max(0.0);
        if e < best.1 - tol {
            best = (c, e);
        }
    }
    if let Some(p) = solve_stationary(q) {
        let e = q.error(&p).max(0.0);
        if e <= best.1 + tol {
            return (p, e);
        }
    }
    best
}

fn solve_stationary(q: &Quadric) -> Option<Vec3> {
    let m = &q.0;
    let block: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into_owned();
    let rhs = -Vec3::new(m[(0, 3)], m[(1, 3)], m[(2, 3)]);
    let eig = SymmetricEigen::new(block).eigenvalues;
    let max = eig.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
    let min = eig.iter().fold(f64::INFINITY, |acc, &x| acc.min(x.abs()));
    if max == 0.0 || min * MAX_CONDITION <= max {
        return None;
    }
    let p = block.lu().solve(&rhs)?;
    p.iter().all(|c| c.is_finite()).then_some(p)
}

/// Fine anchor: each coarse vertex moves to the optimal collapse position of
/// its minimum-error incident edge in `target`. Vertices without incident
/// edges keep their position.
pub fn refine_anchor(coarse: &AnchorMesh, target: &Mesh, target_adj: &AdjacencyMap) -> AnchorMesh {
    let quadrics = vertex_quadrics(target);
    refine_anchor_with(coarse, target, target_adj, &quadrics)
}

pub fn refine_anchor_with(
    coarse: &AnchorMesh,
    target: &Mesh,
    target_adj: &AdjacencyMap,
    quadrics: &[Quadric],
) -> AnchorMesh {
    let source = coarse
        .source_indices
        .as_ref()
        .expect("refinement needs the coarse anchor's target indices");
    let positions = source
        .iter()
        .zip(&coarse.positions)
        .map(|(&s, &current)| refine_vertex(target, target_adj, quadrics, s).unwrap_or(current))
        .collect();
    AnchorMesh {
        positions,
        faces: coarse.faces.clone(),
        stage: AnchorStage::Fine,
        source_indices: None,
    }
}

/// Optimal position over the edges incident to target vertex `s`.
pub fn refine_vertex(
    target: &Mesh,
    adj: &AdjacencyMap,
    quadrics: &[Quadric],
    s: usize,
) -> Option<Vec3> {
    let origin = target.vertices[s];
    let mut best: Option<(Vec3, f64, f64)> = None;
    for &w in adj.neighbors(s) {
        let other = target.vertices[w];
        let q = edge_quadric(&quadrics[s], &quadrics[w]);
        let (p, e) = optimal_position(&q, &origin, &other);
        let tol = tolerance(&q, &origin, &other);
        let moved = (p - origin).norm_squared();
        let better = match best {
            None => true,
            Some((_, be, bm)) => e < be - tol || (e <= be + tol && moved < bm),
        };
        if better {
            best = Some((p, e, moved));
        }
    }
    best.map(|(p, _, _)| p)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    cost: f64,
    u: usize,
    v: usize,
    stamp_u: u32,
    stamp_v: u32,
    pos: Vec3,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.u.cmp(&other.u))
            .then(self.v.cmp(&other.v))
    }
}

struct Decimator {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    face_alive: Vec<bool>,
    vertex_faces: Vec<Vec<usize>>,
    vertex_alive: Vec<bool>,
    stamps: Vec<u32>,
    quadrics: Vec<Quadric>,
    heap: BinaryHeap<Reverse<Candidate>>,
}

impl Decimator {
    fn new(mesh: &Mesh) -> Self {
        let adj = AdjacencyMap::build(mesh);
        let n = mesh.vertices.len();
        let mut d = Decimator {
            vertices: mesh.vertices.clone(),
            faces: mesh.faces.clone(),
            face_alive: mesh
                .faces
                .iter()
                .map(|f| f[0] != f[1] && f[1] != f[2] && f[0] != f[2])
                .collect(),
            vertex_faces: (0..n).map(|v| adj.incident_faces(v).to_vec()).collect(),
            vertex_alive: vec![true; n],
            stamps: vec![0; n],
            quadrics: vertex_quadrics(mesh),
            heap: BinaryHeap::new(),
        };
        for (a, b) in mesh.edges() {
            d.push(a, b);
        }
        d
    }

    fn push(&mut self, a: usize, b: usize) {
        let (u, v) = (a.min(b), a.max(b));
        let q = self.quadrics[u] + self.quadrics[v];
        let (pos, cost) = optimal_position(&q, &self.vertices[u], &self.vertices[v]);
        self.heap.push(Reverse(Candidate {
            cost,
            u,
            v,
            stamp_u: self.stamps[u],
            stamp_v: self.stamps[v],
            pos,
        }));
    }

    fn live_faces(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.vertex_faces[v].iter().copied().filter(|&f| self.face_alive[f])
    }

    fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .live_faces(v)
            .flat_map(|f| self.faces[f])
            .filter(|&w| w != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collapse_allowed(&self, u: usize, v: usize, pos: &Vec3) -> bool {
        // Link condition: shared neighbours are exactly the apexes of shared faces.
        let nu = self.neighbors(u);
        let nv = self.neighbors(v);
        let common = nu.iter().filter(|w| nv.binary_search(w).is_ok()).count();
        let shared = self
            .live_faces(u)
            .filter(|&f| self.faces[f].contains(&v))
            .count();
        if shared == 0 || common != shared {
            return false;
        }
        // No surviving face may flip or collapse to zero area.
        for w in [u, v] {
            for f in self.live_faces(w) {
                let face = self.faces[f];
                if face.contains(&u) && face.contains(&v) {
                    continue;
                }
                let old = self.cross(face, None);
                let new = self.cross(face, Some((w, pos)));
                if old.dot(&new) <= 0.0 || 0.5 * new.norm() <= DEGENERATE_AREA {
                    return false;
                }
            }
        }
        true
    }

    fn cross(&self, face: [usize; 3], moved: Option<(usize, &Vec3)>) -> Vec3 {
        let p = |i: usize| match moved {
            Some((m, pos)) if m == i => *pos,
            _ => self.vertices[i],
        };
        let (a, b, c) = (p(face[0]), p(face[1]), p(face[2]));
        (b - a).cross(&(c - a))
    }

    fn collapse(&mut self, u: usize, v: usize, pos: Vec3) {
        self.vertices[u] = pos;
        self.vertex_alive[v] = false;
        let q = self.quadrics[v];
        self.quadrics[u] += q;
        let v_faces = std::mem::take(&mut self.vertex_faces[v]);
        for f in v_faces {
            if !self.face_alive[f] {
                continue;
            }
            if self.faces[f].contains(&u) {
                self.face_alive[f] = false;
            } else {
                for slot in self.faces[f].iter_mut() {
                    if *slot == v {
                        *slot = u;
                    }
                }
                self.vertex_faces[u].push(f);
            }
        }
        self.vertex_faces[u].retain(|&f| self.face_alive[f]);
        self.stamps[u] += 1;
        self.stamps[v] += 1;
        for w in self.neighbors(u) {
            self.push(u, w);
        }
    }

    fn run(&mut self, target: usize) {
        let mut alive = self.vertex_alive.len();
        while alive > target {
            let Some(Reverse(c)) = self.heap.pop() else {
                break;
            };
            if !self.vertex_alive[c.u]
                || !self.vertex_alive[c.v]
                || self.stamps[c.u] != c.stamp_u
                || self.stamps[c.v] != c.stamp_v
            {
                continue;
            }
            if !self.collapse_allowed(c.u, c.v, &c.pos) {
                continue;
            }
            self.collapse(c.u, c.v, c.pos);
            alive -= 1;
        }
    }

    fn finish(self) -> Mesh {
        let mut used = vec![false; self.vertices.len()];
        for (f, face) in self.faces.iter().enumerate() {
            if self.face_alive[f] {
                for &i in face {
                    used[i] = true;
                }
            }
        }
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for (i, p) in self.vertices.iter().enumerate() {
            if used[i] {
                remap[i] = vertices.len();
                vertices.push(*p);
            }
        }
        let faces = self
            .faces
            .iter()
            .enumerate()
            .filter(|(f, _)| self.face_alive[*f])
            .map(|(_, face)| face.map(|i| remap[i]))
            .collect();
        Mesh { vertices, faces }
    }
}

/// Greedy minimum-error edge-collapse decimation down to `target_vertex_count`
/// vertices (or until no collapse is admissible). Unreferenced vertices are
/// dropped from the result.
pub fn simplify(mesh: &Mesh, target_vertex_count: usize) -> Result<Mesh> {
    if target_vertex_count < 4 {
        return Err(Error::InvalidInput(format!(
            "simplification target {target_vertex_count} is below the minimum of 4"
        )));
    }
    if mesh.vertices.len() <= target_vertex_count {
        return Ok(mesh.clone());
    }
    let mut d = Decimator::new(mesh);
    d.run(target_vertex_count);
    Ok(d.finish())
}
