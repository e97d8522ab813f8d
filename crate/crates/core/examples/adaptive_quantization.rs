//! Valence-adaptive against uniform displacement quantization on a mesh with
//! high-valence poles.
//!
//! `cargo run --release --example adaptive_quantization`

use tvmc::entropy::encode_displacement_field;
use tvmc::spatial::SurfaceIndex;
use tvmc::subdivision::{compute_displacements, dequantize, quantize, QuantMode, QuantParams, SubdivisionPlan};
use tvmc::synth::uv_sphere;
use tvmc::Mesh;

fn main() -> tvmc::Result<()> {
    let base = uv_sphere(24, 12);
    let plan = SubdivisionPlan::new(&base, 2);
    let subdivided = plan.apply(&base.vertices);
    let target = Mesh {
        vertices: subdivided
            .vertices
            .iter()
            .map(|v| v.normalize() * (1.0 + 0.03 * (5.0 * v.z).sin()))
            .collect(),
        faces: subdivided.faces.clone(),
    };
    let d = compute_displacements(&subdivided, &SurfaceIndex::build(&target)?);
    let valences = plan.valences();

    for mode in [QuantMode::Uniform, QuantMode::Adaptive] {
        let params = QuantParams { rho: 200.0, delta: 0.0, hbar: 6, mode };
        let q = quantize(&d, &plan.adjacency, &params)?;
        let bytes = encode_displacement_field(&q, &valences)?;
        let back = dequantize(&q, &plan.adjacency, &params);
        let mse = back.0.iter().zip(&d.0).map(|(a, b)| (a - b).norm_squared()).sum::<f64>() / d.len() as f64;
        let pole_err = (back.0[0] - d.0[0]).norm();
        println!("{mode:?}: {} bytes, rms error {:.3e}, pole error {pole_err:.3e}", bytes.len(), mse.sqrt());
    }
    Ok(())
}
