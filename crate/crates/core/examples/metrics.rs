//! D1/D2 PSNR between a mesh and a perturbed copy, and BD-rate between two
//! RD curves.
//!
//! `cargo run --release --example metrics`

use tvmc::metrics::{bd_rate, mesh_quality, RdCurve};
use tvmc::synth::icosphere;
use tvmc::{Mesh, Vec3};

fn main() -> tvmc::Result<()> {
    let reference = icosphere(4);
    for offset in [0.0, 0.001, 0.01] {
        let moved = Mesh {
            vertices: reference.vertices.iter().map(|v| v + Vec3::new(offset, 0.0, 0.0)).collect(),
            faces: reference.faces.clone(),
        };
        let q = mesh_quality(&reference, &moved, 50_000, 0)?;
        println!("shift {offset:<6} D1 {:>7.2} dB  D2 {:>7.2} dB", q.d1_db, q.d2_db);
    }

    let anchor = RdCurve::from_pairs(&[(100.0, 30.0), (200.0, 34.0), (400.0, 37.0), (800.0, 39.0)]);
    let test = RdCurve::from_pairs(&[(90.0, 30.5), (170.0, 34.2), (330.0, 37.4), (700.0, 39.3)]);
    println!("BD-rate: {:.2}%", bd_rate(&anchor, &test)?);
    Ok(())
}
