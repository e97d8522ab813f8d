//! Spatial indices: an octree for nearest-vertex queries and a bounding-volume
//! hierarchy for closest-point-on-surface queries.

mod bvh;
mod octree;
mod triangle;

pub use self::bvh::{SurfaceHit, SurfaceIndex};
pub use self::octree::{VertexOctree, DEFAULT_LEAF_CAPACITY, MAX_DEPTH};
pub use self::triangle::closest_point_on_triangle;
