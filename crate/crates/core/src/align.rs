//! Fast topology alignment: the initial anchor mesh.
//!
//! Each vertex of the reference base mesh is snapped to its nearest vertex in
//! the target frame. The anchor keeps the reference connectivity verbatim, so
//! a frame with arbitrary topology is re-expressed on the base mesh's graph.

use crate::spatial::{VertexOctree, DEFAULT_LEAF_CAPACITY};
use crate::{Error, Mesh, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorStage {
    Initial,
    Coarse,
    Fine,
}

/// A mesh on the reference base connectivity whose positions approximate the
/// current frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorMesh {
    pub positions: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
    pub stage: AnchorStage,
    /// Target vertex each position was taken from (initial and coarse stages).
    pub source_indices: Option<Vec<usize>>,
}

impl AnchorMesh {
    pub fn to_mesh(&self) -> Mesh {
        Mesh {
            vertices: self.positions.clone(),
            faces: self.faces.clone(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    /// Sum of Euclidean distances to the reference positions.
    pub fn total_distance(&self, reference: &Mesh) -> f64 {
        self.positions
            .iter()
            .zip(&reference.vertices)
            .map(|(a, b)| (a - b).norm())
            .sum()
    }
}

/// Per-vertex nearest-neighbour alignment; duplicate matches are allowed.
pub fn align(reference: &Mesh, target: &Mesh) -> Result<AnchorMesh> {
    let octree = target_octree(target)?;
    Ok(align_with(reference, &octree, false))
}

pub(crate) fn target_octree(target: &Mesh) -> Result<VertexOctree> {
    if target.vertices.is_empty() {
        return Err(Error::InvalidInput("alignment target has no vertices".into()));
    }
    VertexOctree::build(&target.vertices, DEFAULT_LEAF_CAPACITY)
}

/// Aligns against a prebuilt octree over the target vertices.
///
/// With `injective`, reference vertices claim the nearest still unused target
/// vertex in ascending index order; once every target vertex is taken the
/// remaining ones fall back to the plain nearest vertex.
pub fn align_with(reference: &Mesh, octree: &VertexOctree, injective: bool) -> AnchorMesh {
    let mut used = vec![false; if injective { octree.len() } else { 0 }];
    let source: Vec<usize> = reference
        .vertices
        .iter()
        .map(|v| {
            if injective {
                let hit = octree
                    .nearest_where(v, |i| !used[i])
                    .map(|(i, _)| i)
                    .unwrap_or_else(|| octree.nearest(v).0);
                used[hit] = true;
                hit
            } else {
                octree.nearest(v).0
            }
        })
        .collect();
    AnchorMesh {
        positions: source.iter().map(|&i| octree.points()[i]).collect(),
        faces: reference.faces.clone(),
        stage: AnchorStage::Initial,
        source_indices: Some(source),
    }
}
