//! Midpoint subdivision, displacement fields and valence-adaptive quantization.

use crate::spatial::SurfaceIndex;
use crate::{AdjacencyMap, Error, Mesh, Result, Vec3};

/// Splits every triangle into four through its edge midpoints, `levels` times.
///
/// Vertex order is canonical: the vertices of the previous level keep their
/// indices, followed by one midpoint per edge in ascending `(min, max)` order.
/// The second return value lists the two parents of every added vertex (entry
/// `k` describes vertex `mesh.vertices.len() + k`).
pub fn subdivide_midpoint(mesh: &Mesh, levels: usize) -> (Mesh, Vec<[usize; 2]>) {
    let mut current = mesh.clone();
    let mut parents = Vec::new();
    for _ in 0..levels {
        let n = current.vertices.len();
        let edges = current.edges();
        let mid = |a: usize, b: usize| -> usize {
            if a == b {
                return a;
            }
            let key = (a.min(b), a.max(b));
            n + edges.binary_search(&key).expect("edge of a face")
        };
        let mut vertices = current.vertices.clone();
        vertices.reserve(edges.len());
        for &(a, b) in &edges {
            vertices.push((current.vertices[a] + current.vertices[b]) * 0.5);
            parents.push([a, b]);
        }
        let mut faces = Vec::with_capacity(current.faces.len() * 4);
        for &[a, b, c] in &current.faces {
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            faces.push([a, ab, ca]);
            faces.push([ab, b, bc]);
            faces.push([ca, bc, c]);
            faces.push([ab, bc, ca]);
        }
        current = Mesh { vertices, faces };
    }
    (current, parents)
}

/// Connectivity of a subdivided base mesh, reusable for any positions on the
/// same base connectivity.
#[derive(Debug, Clone)]
pub struct SubdivisionPlan {
    pub base_vertex_count: usize,
    pub parents: Vec<[usize; 2]>,
    pub faces: Vec<[usize; 3]>,
    pub adjacency: AdjacencyMap,
}

impl SubdivisionPlan {
    pub fn new(base: &Mesh, levels: usize) -> Self {
        let (mesh, parents) = subdivide_midpoint(base, levels);
        SubdivisionPlan {
            base_vertex_count: base.vertices.len(),
            adjacency: AdjacencyMap::build(&mesh),
            parents,
            faces: mesh.faces,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.base_vertex_count + self.parents.len()
    }

    pub fn valences(&self) -> Vec<usize> {
        (0..self.vertex_count()).map(|v| self.adjacency.valence(v)).collect()
    }

    /// Same result as [`subdivide_midpoint`] on `base_positions` with the
    /// planned connectivity.
    pub fn apply(&self, base_positions: &[Vec3]) -> Mesh {
        assert_eq!(base_positions.len(), self.base_vertex_count);
        let mut vertices = Vec::with_capacity(self.vertex_count());
        vertices.extend_from_slice(base_positions);
        for &[a, b] in &self.parents {
            vertices.push((vertices[a] + vertices[b]) * 0.5);
        }
        Mesh {
            vertices,
            faces: self.faces.clone(),
        }
    }
}

/// Per-vertex correction vectors of a subdivided mesh.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DisplacementField(pub Vec<Vec3>);

impl DisplacementField {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Mean vector length.
    pub fn mean_magnitude(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.0.iter().map(|d| d.norm()).sum::<f64>() / self.0.len() as f64
    }

    /// Adds the field to the vertices of `mesh`.
    pub fn apply(&self, mesh: &Mesh) -> Mesh {
        Mesh {
            vertices: mesh
                .vertices
                .iter()
                .zip(&self.0)
                .map(|(v, d)| v + d)
                .collect(),
            faces: mesh.faces.clone(),
        }
    }
}

/// Offsets from each subdivided vertex to the closest point of the target
/// surface indexed by `surf`.
pub fn compute_displacements(subdivided: &Mesh, surf: &SurfaceIndex) -> DisplacementField {
    DisplacementField(
        subdivided
            .vertices
            .iter()
            .map(|v| surf.closest_point(v).point - v)
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantMode {
    Adaptive,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantParams {
    /// Scale applied before rounding (an inverse step size, in 1/model units).
    pub rho: f64,
    pub delta: f64,
    /// Valence that maps to unit weight.
    pub hbar: u32,
    pub mode: QuantMode,
}

impl QuantParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidInput(format!("rho must be positive, got {}", self.rho)));
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidInput("delta must be finite".into()));
        }
        if self.hbar < 1 {
            return Err(Error::InvalidInput("hbar must be at least 1".into()));
        }
        Ok(())
    }
}

/// Quantization weight `|N(v)| / hbar`, with isolated vertices counted as
/// having one neighbour. Uniform mode always returns 1.
pub fn neighbor_weight(adj: &AdjacencyMap, vertex: usize, params: &QuantParams) -> f64 {
    match params.mode {
        QuantMode::Uniform => 1.0,
        QuantMode::Adaptive => adj.valence(vertex).max(1) as f64 / params.hbar as f64,
    }
}

/// Integer displacement field.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QuantizedField(pub Vec<[i32; 3]>);

impl QuantizedField {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `round(d * rho * weight + delta)` per component, half away from zero.
pub fn quantize(
    field: &DisplacementField,
    adj: &AdjacencyMap,
    params: &QuantParams,
) -> Result<QuantizedField> {
    params.validate()?;
    field
        .0
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let w = neighbor_weight(adj, i, params);
            let mut q = [0i32; 3];
            for k in 0..3 {
                let v = (d[k] * params.rho * w + params.delta).round();
                if !(v >= i32::MIN as f64 && v <= i32::MAX as f64) {
                    return Err(Error::QuantOverflow { value: v });
                }
                q[k] = v as i32;
            }
            Ok(q)
        })
        .collect::<Result<_>>()
        .map(QuantizedField)
}

pub fn dequantize(
    field: &QuantizedField,
    adj: &AdjacencyMap,
    params: &QuantParams,
) -> DisplacementField {
    DisplacementField(
        field
            .0
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let scale = params.rho * neighbor_weight(adj, i, params);
                Vec3::new(
                    (q[0] as f64 - params.delta) / scale,
                    (q[1] as f64 - params.delta) / scale,
                    (q[2] as f64 - params.delta) / scale,
                )
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::icosphere;

    fn tri() -> Mesh {
        Mesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::y()], vec![[0, 1, 2]]).unwrap()
    }

    fn params(rho: f64, mode: QuantMode) -> QuantParams {
        QuantParams {
            rho,
            delta: 0.0,
            hbar: 6,
            mode,
        }
    }

    #[test]
    fn one_level_on_a_triangle() {
        let (m, parents) = subdivide_midpoint(&tri(), 1);
        assert_eq!((m.vertices.len(), m.faces.len()), (6, 4));
        assert_eq!(parents, vec![[0, 1], [0, 2], [1, 2]]);
        assert_eq!(m.vertices[5], Vec3::new(0.5, 0.5, 0.0));
        assert_eq!(subdivide_midpoint(&tri(), 0).0, tri());
    }

    #[test]
    fn icosahedron_two_levels() {
        // V' = V + E per level: 12 + 30 = 42, 42 + 120 = 162; faces 20 * 16.
        let ico = icosphere(0);
        let (m, parents) = subdivide_midpoint(&ico, 2);
        assert_eq!((m.vertices.len(), m.faces.len()), (162, 320));
        assert_eq!(parents.len(), 150);
        let (again, _) = subdivide_midpoint(&ico, 2);
        assert_eq!(m, again);
    }

    #[test]
    fn plan_matches_direct_subdivision() {
        let ico = icosphere(1);
        let plan = SubdivisionPlan::new(&ico, 2);
        let moved: Vec<Vec3> = ico.vertices.iter().map(|v| v * 1.5 + Vec3::x()).collect();
        let direct = subdivide_midpoint(&Mesh::new(moved.clone(), ico.faces.clone()).unwrap(), 2).0;
        assert_eq!(plan.apply(&moved), direct);
        assert_eq!(plan.valences().len(), direct.vertices.len());
    }

    #[test]
    fn weights() {
        let ico = icosphere(1);
        let (m, _) = subdivide_midpoint(&ico, 1);
        let adj = AdjacencyMap::build(&m);
        let p = params(1.0, QuantMode::Adaptive);
        // Original icosahedron corners keep valence 5, all others have 6.
        assert!((neighbor_weight(&adj, 0, &p) - 5.0 / 6.0).abs() < 1e-15);
        let six = (0..m.vertices.len()).find(|&v| adj.valence(v) == 6).unwrap();
        assert_eq!(neighbor_weight(&adj, six, &p), 1.0);
        assert_eq!(neighbor_weight(&adj, six, &params(1.0, QuantMode::Uniform)), 1.0);

        let twelve = Mesh::new(
            (0..13).map(|i| Vec3::new(i as f64, (i * i) as f64, 0.0)).collect(),
            (1..13).map(|i| [0, i, i % 12 + 1]).collect(),
        )
        .unwrap();
        let adj = AdjacencyMap::build(&twelve);
        assert_eq!(neighbor_weight(&adj, 0, &p), 2.0);

        let lonely = Mesh::new(vec![Vec3::zeros()], vec![]).unwrap();
        let adj = AdjacencyMap::build(&lonely);
        assert_eq!(neighbor_weight(&adj, 0, &p), 1.0 / 6.0);
    }

    #[test]
    fn quantize_basics() {
        let adj = AdjacencyMap::build(&Mesh::new(vec![Vec3::zeros()], vec![]).unwrap());
        let p = params(4.0, QuantMode::Uniform);
        let q = quantize(&DisplacementField(vec![Vec3::x()]), &adj, &p).unwrap();
        assert_eq!(q.0, vec![[4, 0, 0]]);
        let q = quantize(&DisplacementField(vec![Vec3::new(-0.125, 0.125, 0.0)]), &adj, &p).unwrap();
        assert_eq!(q.0, vec![[-1, 1, 0]], "half away from zero");
        let back = dequantize(&QuantizedField(vec![[0, 0, 0]]), &adj, &p);
        assert_eq!(back.0, vec![Vec3::zeros()]);
        let big = params(1e10, QuantMode::Uniform);
        assert!(matches!(
            quantize(&DisplacementField(vec![Vec3::x()]), &adj, &big),
            Err(Error::QuantOverflow { .. })
        ));
    }

    #[test]
    fn grid_values_round_trip_exactly() {
        let ico = icosphere(1);
        let adj = AdjacencyMap::build(&ico);
        let p = QuantParams { rho: 8.0, delta: 0.0, hbar: 6, mode: QuantMode::Adaptive };
        let q = QuantizedField((0..ico.vertices.len() as i32).map(|i| [i, -i, i % 7]).collect());
        let d = dequantize(&q, &adj, &p);
        assert_eq!(quantize(&d, &adj, &p).unwrap(), q);
    }
}
