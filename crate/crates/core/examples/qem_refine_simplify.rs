//! Quadric-error decimation of a dense mesh and quadric refinement of an
//! anchor against it.
//!
//! `cargo run --release --example qem_refine_simplify`

use tvmc::align::align;
use tvmc::qem::{refine_anchor, simplify};
use tvmc::spatial::SurfaceIndex;
use tvmc::synth::{icosphere, subdivided_cube};
use tvmc::AdjacencyMap;

fn main() -> tvmc::Result<()> {
    let cube = subdivided_cube(4);
    for target in [400, 100, 8] {
        let base = simplify(&cube, target)?;
        println!("cube {} -> {} vertices, {} faces", cube.vertex_count(), base.vertex_count(), base.face_count());
    }

    // Refinement moves each snapped vertex to the quadric optimum of its
    // cheapest incident edge. On a sphere that point lies slightly off the
    // surface and off the original vertex.
    let sphere = icosphere(4);
    let base = simplify(&sphere, 162)?;
    let coarse = align(&base, &sphere)?;
    let fine = refine_anchor(&coarse, &sphere, &AdjacencyMap::build(&sphere));
    let surf = SurfaceIndex::build(&sphere)?;
    let n = fine.positions.len() as f64;
    let moved = coarse.positions.iter().zip(&fine.positions).map(|(a, b)| (a - b).norm()).sum::<f64>() / n;
    let off = fine.positions.iter().map(|p| surf.closest_point(p).distance).sum::<f64>() / n;
    println!("sphere anchor of {} vertices: mean move {moved:.5}, mean distance to surface {off:.2e}", fine.positions.len());
    Ok(())
}
