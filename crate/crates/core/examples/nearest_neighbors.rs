//! Octree nearest-vertex queries and BVH closest-point queries.
//!
//! `cargo run --release --example nearest_neighbors`

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tvmc::metrics::random_points;
use tvmc::spatial::{SurfaceIndex, VertexOctree, DEFAULT_LEAF_CAPACITY};
use tvmc::synth::icosphere;
use tvmc::Vec3;

fn main() -> tvmc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let points = random_points(100_000, &mut rng);
    let queries = random_points(10_000, &mut rng);

    let t = Instant::now();
    let tree = VertexOctree::build(&points, DEFAULT_LEAF_CAPACITY)?;
    println!("octree over {} points, depth {}, built in {:.1?}", tree.len(), tree.depth(), t.elapsed());
    let t = Instant::now();
    let mean: f64 = queries.iter().map(|q| tree.nearest(q).1).sum::<f64>() / queries.len() as f64;
    println!("{} queries in {:.1?}, mean distance {mean:.5}", queries.len(), t.elapsed());

    let sphere = icosphere(4);
    let surf = SurfaceIndex::build(&sphere)?;
    for q in [Vec3::new(0.0, 0.0, 2.0), Vec3::new(0.3, 0.2, 0.1), Vec3::new(-1.0, 1.0, 0.0)] {
        let hit = surf.closest_point(&q);
        println!(
            "closest to ({:.1}, {:.1}, {:.1}): face {}, distance {:.4}",
            q.x, q.y, q.z, hit.face, hit.distance
        );
    }
    Ok(())
}
