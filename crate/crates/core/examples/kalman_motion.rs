//! Kalman-fused motion estimation over a few frames of a moving sphere.
//!
//! `cargo run --example kalman_motion`

use tvmc::motion::{generate_coarse_anchor, KalmanParams, KalmanState};
use tvmc::spatial::{VertexOctree, DEFAULT_LEAF_CAPACITY};
use tvmc::synth::icosphere;
use tvmc::{Mesh, Vec3};

fn main() -> tvmc::Result<()> {
    let rest = icosphere(3);
    let velocity = Vec3::new(0.02, 0.0, 0.01);
    let frame = |t: f64| Mesh {
        vertices: rest.vertices.iter().map(|v| v + velocity * t).collect(),
        faces: rest.faces.clone(),
    };

    let mut reference = frame(0.0);
    let mut state = KalmanState::new(KalmanParams::LOW_MOTION);
    for t in 1..=5 {
        let target = frame(t as f64);
        let octree = VertexOctree::build(&target.vertices, DEFAULT_LEAF_CAPACITY)?;
        let coarse = generate_coarse_anchor(&reference, &octree, &state);
        let exact = coarse
            .anchor
            .positions
            .iter()
            .zip(&target.vertices)
            .filter(|(a, b)| a == b)
            .count();
        println!(
            "frame {t}: P = {:.3e}, {exact}/{} vertices on their true counterpart",
            coarse.state.p,
            target.vertices.len()
        );
        reference = coarse.anchor.to_mesh();
        state = coarse.state;
    }
    Ok(())
}
