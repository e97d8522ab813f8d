//! Re-express a frame with different connectivity on the base mesh graph by
//! nearest-vertex alignment.
//!
//! `cargo run --example topology_alignment`

use tvmc::align::align;
use tvmc::qem::simplify;
use tvmc::synth::{generate, GenParams};

fn main() -> tvmc::Result<()> {
    let seq = generate(&GenParams { frames: 2, reindex: true, ..GenParams::default() })?;
    let [first, second] = seq.frames() else { unreachable!() };
    println!("frame 0: {} vertices, frame 1: {} vertices", first.vertex_count(), second.vertex_count());

    let base = simplify(first, 162)?;
    let anchor = align(&base, second)?;
    println!(
        "anchor: {} vertices on the base connectivity ({} faces), stage {:?}",
        anchor.vertex_count(),
        anchor.faces.len(),
        anchor.stage
    );
    println!("summed snapping distance {:.4}", anchor.total_distance(&base));
    let sources = anchor.source_indices.as_ref().expect("alignment records sources");
    let mut unique = sources.clone();
    unique.sort_unstable();
    unique.dedup();
    println!("{} distinct target vertices used", unique.len());
    Ok(())
}
