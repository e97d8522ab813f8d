//! Triangle meshes, sequences of them, and 1-ring adjacency.

mod obj;
mod ply;

use std::path::Path;

use nalgebra::Vector3;

use crate::{Error, Result};

pub use self::obj::{read_obj, write_obj};
pub use self::ply::{read_ply, write_ply, PlyEncoding};

pub type Vec3 = Vector3<f64>;

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut b = Aabb::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x
    }

    pub fn diagonal(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            (self.max - self.min).norm()
        }
    }

    /// Largest side length.
    pub fn max_extent(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            (self.max - self.min).max()
        }
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    /// Squared distance from `p` to the box (zero inside).
    pub fn distance_squared(&self, p: &Vec3) -> f64 {
        let mut d = 0.0;
        for k in 0..3 {
            let v = if p[k] < self.min[k] {
                self.min[k] - p[k]
            } else if p[k] > self.max[k] {
                p[k] - self.max[k]
            } else {
                0.0
            };
            d += v * v;
        }
        d
    }
}

/// File formats understood by [`Mesh::load`] and [`Mesh::save`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(MeshFormat::Obj),
            "ply" => Some(MeshFormat::Ply),
            _ => None,
        }
    }
}

/// Indexed triangle mesh with double-precision positions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

/// Findings of [`Mesh::validate`] that are not hard errors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    /// Faces that repeat a vertex index.
    pub degenerate_faces: Vec<usize>,
}

impl Mesh {
    /// Builds a mesh, rejecting out-of-range indices and non-finite positions.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = Mesh { vertices, faces };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn load(path: impl AsRef<Path>, format: MeshFormat) -> Result<Self> {
        let path = path.as_ref();
        let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let parsed = match format {
            MeshFormat::Obj => read_obj(&data),
            MeshFormat::Ply => read_ply(&data),
        };
        parsed
            .and_then(|mesh| mesh.validate().map(|_| mesh))
            .map_err(|e| Error::InFile {
                path: path.to_path_buf(),
                source: Box::new(e),
            })
    }

    /// Loads a mesh, picking the format from the file extension.
    pub fn load_auto(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let format = MeshFormat::from_path(path).ok_or_else(|| {
            Error::InvalidInput(format!("{}: unknown mesh extension", path.display()))
        })?;
        Mesh::load(path, format)
    }

    pub fn save(&self, path: impl AsRef<Path>, format: MeshFormat) -> Result<()> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        match format {
            MeshFormat::Obj => write_obj(self, &mut bytes),
            MeshFormat::Ply => write_ply(self, PlyEncoding::Ascii, &mut bytes),
        }
        .map_err(|e| Error::io(path, e))?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        if let Some(i) = self
            .vertices
            .iter()
            .position(|v| !v.iter().all(|c| c.is_finite()))
        {
            return Err(Error::NonFinite(i));
        }
        let n = self.vertices.len();
        let mut report = ValidationReport::default();
        for (fi, f) in self.faces.iter().enumerate() {
            if let Some(&index) = f.iter().find(|&&i| i >= n) {
                return Err(Error::IndexOutOfRange {
                    face: fi,
                    index,
                    count: n,
                });
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                report.degenerate_faces.push(fi);
            }
        }
        Ok(report)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Unnormalized face normal; its length is twice the face area.
    pub fn face_cross(&self, face: usize) -> Vec3 {
        let [a, b, c] = self.triangle(face);
        (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, face: usize) -> f64 {
        0.5 * self.face_cross(face).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Edges as sorted vertex pairs, deduplicated and in ascending order.
    /// Degenerate faces contribute only their distinct pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .faces
            .iter()
            .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }
}

/// Non-empty, temporally ordered list of frames. Frames may differ in vertex
/// count and connectivity.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshSequence {
    frames: Vec<Mesh>,
}

impl MeshSequence {
    pub fn new(frames: Vec<Mesh>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::InvalidInput("mesh sequence has no frames".into()));
        }
        Ok(MeshSequence { frames })
    }

    pub fn frames(&self) -> &[Mesh] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_frames(self) -> Vec<Mesh> {
        self.frames
    }

    pub fn bbox(&self) -> Aabb {
        self.frames
            .iter()
            .fold(Aabb::empty(), |acc, f| acc.union(&f.bbox()))
    }
}

/// 1-ring neighbors and incident faces of every vertex, both sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMap {
    neighbors: Vec<Vec<usize>>,
    faces: Vec<Vec<usize>>,
}

impl AdjacencyMap {
    pub fn build(mesh: &Mesh) -> Self {
        let n = mesh.vertices.len();
        let mut neighbors = vec![Vec::new(); n];
        let mut faces = vec![Vec::new(); n];
        for (fi, f) in mesh.faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                if a != b {
                    neighbors[a].push(b);
                    neighbors[b].push(a);
                }
            }
            faces[f[0]].push(fi);
            if f[1] != f[0] {
                faces[f[1]].push(fi);
            }
            if f[2] != f[0] && f[2] != f[1] {
                faces[f[2]].push(fi);
            }
        }
        for list in neighbors.iter_mut().chain(faces.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        AdjacencyMap { neighbors, faces }
    }

    pub fn vertex_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn incident_faces(&self, v: usize) -> &[usize] {
        &self.faces[v]
    }

    pub fn valence(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }
}
