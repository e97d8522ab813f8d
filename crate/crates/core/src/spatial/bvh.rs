use super::closest_point_on_triangle;
use crate::mesh::Aabb;
use crate::{Error, Mesh, Result, Vec3};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, start: usize, end: usize },
    Inner { bounds: Aabb, left: u32, right: u32 },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// Result of a closest-point query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceHit {
    pub point: Vec3,
    pub face: usize,
    pub distance: f64,
}

/// Bounding-volume hierarchy over the triangles of a mesh.
#[derive(Debug, Clone)]
pub struct SurfaceIndex {
    triangles: Vec<[Vec3; 3]>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl SurfaceIndex {
    pub fn build(mesh: &Mesh) -> Result<Self> {
        if mesh.faces.is_empty() {
            return Err(Error::InvalidInput(
                "surface index needs a mesh with at least one face".into(),
            ));
        }
        let triangles: Vec<[Vec3; 3]> = (0..mesh.faces.len()).map(|f| mesh.triangle(f)).collect();
        let boxes: Vec<Aabb> = triangles.iter().map(Aabb::from_points).collect();
        let centroids: Vec<Vec3> = triangles.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut index = SurfaceIndex {
            triangles,
            order: (0..mesh.faces.len()).collect(),
            nodes: Vec::new(),
        };
        let n = index.order.len();
        index.build_range(0, n, &boxes, &centroids);
        Ok(index)
    }

    fn build_range(&mut self, start: usize, end: usize, boxes: &[Aabb], centroids: &[Vec3]) -> u32 {
        let bounds = self.order[start..end]
            .iter()
            .fold(Aabb::empty(), |acc, &f| acc.union(&boxes[f]));
        let id = self.nodes.len() as u32;
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { bounds, start, end });
            return id;
        }
        let cb = Aabb::from_points(self.order[start..end].iter().map(|&f| &centroids[f]));
        let ext = cb.max - cb.min;
        let axis = if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        };
        self.order[start..end].sort_by(|&a, &b| {
            centroids[a][axis]
                .total_cmp(&centroids[b][axis])
                .then(a.cmp(&b))
        });
        let mid = start + (end - start) / 2;
        self.nodes.push(Node::Leaf { bounds, start, end });
        let left = self.build_range(start, mid, boxes, centroids);
        let right = self.build_range(mid, end, boxes, centroids);
        self.nodes[id as usize] = Node::Inner { bounds, left, right };
        id
    }

    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    /// Every face index held by a leaf, in traversal order.
    pub fn indexed_faces(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { start, end, .. } => Some(&self.order[*start..*end]),
                Node::Inner { .. } => None,
            })
            .flatten()
            .copied()
            .collect()
    }

    /// Closest point on the indexed surface. Among equidistant faces the
    /// smallest face index wins.
    pub fn closest_point(&self, query: &Vec3) -> SurfaceHit {
        let mut best = (f64::INFINITY, usize::MAX, Vec3::zeros());
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if node.bounds().distance_squared(query) > best.0 {
                continue;
            }
            match node {
                Node::Leaf { start, end, .. } => {
                    for &f in &self.order[*start..*end] {
                        let [a, b, c] = &self.triangles[f];
                        let p = closest_point_on_triangle(query, a, b, c);
                        let d2 = (p - query).norm_squared();
                        if d2 < best.0 || (d2 == best.0 && f < best.1) {
                            best = (d2, f, p);
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    let dl = self.nodes[*left as usize].bounds().distance_squared(query);
                    let dr = self.nodes[*right as usize].bounds().distance_squared(query);
                    // Push the farther child first so the nearer one is visited first.
                    if dl <= dr {
                        stack.push(*right);
                        stack.push(*left);
                    } else {
                        stack.push(*left);
                        stack.push(*right);
                    }
                }
            }
        }
        SurfaceHit {
            point: best.2,
            face: best.1,
            distance: best.0.sqrt(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(mesh: &Mesh, q: &Vec3) -> f64 {
        (0..mesh.faces.len())
            .map(|f| {
                let [a, b, c] = mesh.triangle(f);
                (closest_point_on_triangle(q, &a, &b, &c) - q).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn random_soup(rng: &mut ChaCha8Rng, faces: usize) -> Mesh {
        let mut vertices = Vec::new();
        let mut fs = Vec::new();
        for f in 0..faces {
            let base = Vec3::new(rng.random(), rng.random(), rng.random()) * 4.0;
            for _ in 0..3 {
                vertices.push(base + Vec3::new(rng.random(), rng.random(), rng.random()) * 0.5);
            }
            fs.push([3 * f, 3 * f + 1, 3 * f + 2]);
        }
        Mesh::new(vertices, fs).unwrap()
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mesh = random_soup(&mut rng, 100);
        let idx = SurfaceIndex::build(&mesh).unwrap();
        let mut faces = idx.indexed_faces();
        faces.sort_unstable();
        assert_eq!(faces, (0..100).collect::<Vec<_>>());
        for _ in 0..200 {
            let q = Vec3::new(rng.random(), rng.random(), rng.random()) * 5.0;
            let hit = idx.closest_point(&q);
            assert!((hit.distance - brute(&mesh, &q)).abs() <= 1e-12);
        }
    }

    #[test]
    fn orthogonal_projection_and_on_surface() {
        let mesh = Mesh::new(
            vec![Vec3::zeros(), Vec3::new(3.0, 0.0, 0.0), Vec3::new(0.0, 3.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let idx = SurfaceIndex::build(&mesh).unwrap();
        let hit = idx.closest_point(&Vec3::new(1.0, 1.0, 2.5));
        assert!((hit.point - Vec3::new(1.0, 1.0, 0.0)).norm() < 1e-15);
        assert!((hit.distance - 2.5).abs() < 1e-15);
        let on = Vec3::new(0.5, 0.7, 0.0);
        assert_eq!(idx.closest_point(&on).distance, 0.0);
    }

    #[test]
    fn no_faces_is_error() {
        let mesh = Mesh::new(vec![Vec3::zeros()], vec![]).unwrap();
        assert!(SurfaceIndex::build(&mesh).is_err());
    }
}
