use crate::{Error, Result, Vec3};

pub const DEFAULT_LEAF_CAPACITY: usize = 16;
pub const MAX_DEPTH: usize = 21;

#[derive(Debug, Clone)]
enum NodeKind {
    /// Range into `VertexOctree::order`.
    Leaf { start: usize, end: usize },
    /// Child node ids by octant (bit 0 = x, bit 1 = y, bit 2 = z).
    Internal { children: [Option<u32>; 8] },
}

#[derive(Debug, Clone)]
struct Node {
    center: Vec3,
    half: f64,
    kind: NodeKind,
}

impl Node {
    fn distance_squared(&self, p: &Vec3) -> f64 {
        let mut d = 0.0;
        for k in 0..3 {
            let v = ((p[k] - self.center[k]).abs() - self.half).max(0.0);
            d += v * v;
        }
        d
    }
}

/// Octree over a fixed point set. Nearest queries return the smallest index
/// among equidistant points, so results match a linear scan exactly.
#[derive(Debug, Clone)]
pub struct VertexOctree {
    points: Vec<Vec3>,
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl VertexOctree {
    pub fn build(points: &[Vec3], leaf_capacity: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("cannot build an octree over zero points".into()));
        }
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidInput("octree points must be finite".into()));
        }
        let leaf_capacity = leaf_capacity.max(1);
        let bbox = crate::mesh::Aabb::from_points(points);
        let mut tree = VertexOctree {
            points: points.to_vec(),
            nodes: Vec::new(),
            order: Vec::with_capacity(points.len()),
        };
        let all: Vec<usize> = (0..points.len()).collect();
        tree.build_node(all, bbox.center(), 0.5 * bbox.max_extent(), 0, leaf_capacity);
        Ok(tree)
    }

    fn build_node(
        &mut self,
        indices: Vec<usize>,
        center: Vec3,
        half: f64,
        depth: usize,
        leaf_capacity: usize,
    ) -> u32 {
        let id = self.nodes.len() as u32;
        if indices.len() <= leaf_capacity || depth >= MAX_DEPTH || half == 0.0 {
            let start = self.order.len();
            self.order.extend_from_slice(&indices);
            self.nodes.push(Node {
                center,
                half,
                kind: NodeKind::Leaf {
                    start,
                    end: self.order.len(),
                },
            });
            return id;
        }
        self.nodes.push(Node {
            center,
            half,
            kind: NodeKind::Internal { children: [None; 8] },
        });
        let mut buckets: [Vec<usize>; 8] = Default::default();
        for i in indices {
            buckets[octant(&center, &self.points[i])].push(i);
        }
        let mut children = [None; 8];
        for (k, bucket) in buckets.into_iter().enumerate() {
            if bucket.is_empty() {
                continue;
            }
            let q = 0.5 * half;
            let offset = Vec3::new(
                if k & 1 != 0 { q } else { -q },
                if k & 2 != 0 { q } else { -q },
                if k & 4 != 0 { q } else { -q },
            );
            children[k] = Some(self.build_node(bucket, center + offset, q, depth + 1, leaf_capacity));
        }
        self.nodes[id as usize].kind = NodeKind::Internal { children };
        id
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Depth of the deepest leaf (a lone root leaf has depth 0).
    pub fn depth(&self) -> usize {
        fn walk(tree: &VertexOctree, id: u32) -> usize {
            match &tree.nodes[id as usize].kind {
                NodeKind::Leaf { .. } => 0,
                NodeKind::Internal { children } => {
                    1 + children.iter().flatten().map(|&c| walk(tree, c)).max().unwrap_or(0)
                }
            }
        }
        walk(self, 0)
    }

    /// Point indices held by each leaf, in traversal order.
    pub fn leaves(&self) -> Vec<&[usize]> {
        self.nodes
            .iter()
            .filter_map(|n| match n.kind {
                NodeKind::Leaf { start, end } => Some(&self.order[start..end]),
                NodeKind::Internal { .. } => None,
            })
            .collect()
    }

    /// Index of the nearest point and its Euclidean distance.
    pub fn nearest(&self, query: &Vec3) -> (usize, f64) {
        self.nearest_where(query, |_| true)
            .expect("octree is never empty")
    }

    /// Nearest point among those accepted by `allowed`, or `None` when every
    /// point is rejected.
    pub fn nearest_where(
        &self,
        query: &Vec3,
        allowed: impl Fn(usize) -> bool,
    ) -> Option<(usize, f64)> {
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(0, query, &allowed, &mut best);
        (best.0 != usize::MAX).then(|| (best.0, best.1.sqrt()))
    }

    fn search(&self, id: u32, q: &Vec3, allowed: &impl Fn(usize) -> bool, best: &mut (usize, f64)) {
        let node = &self.nodes[id as usize];
        match &node.kind {
            NodeKind::Leaf { start, end } => {
                for &i in &self.order[*start..*end] {
                    if !allowed(i) {
                        continue;
                    }
                    let d2 = (self.points[i] - q).norm_squared();
                    if d2 < best.1 || (d2 == best.1 && i < best.0) {
                        *best = (i, d2);
                    }
                }
            }
            NodeKind::Internal { children } => {
                let mut order: [(f64, u32); 8] = [(f64::INFINITY, 0); 8];
                let mut n = 0;
                for &c in children.iter().flatten() {
                    order[n] = (self.nodes[c as usize].distance_squared(q), c);
                    n += 1;
                }
                let order = &mut order[..n];
                order.sort_by(|a, b| a.0.total_cmp(&b.0));
                for &(d2, c) in order.iter() {
                    if d2 > best.1 {
                        break;
                    }
                    self.search(c, q, allowed, best);
                }
            }
        }
    }
}

fn octant(center: &Vec3, p: &Vec3) -> usize {
    (p.x >= center.x) as usize | ((p.y >= center.y) as usize) << 1 | ((p.z >= center.z) as usize) << 2
}
