//! Encode a synthetic sequence, decode it and report per-frame sizes and
//! quality.
//!
//! `cargo run --release --example encode_decode`

use tvmc::bitstream::{decode_sequence, encode_sequence, CodecConfig};
use tvmc::metrics::mesh_quality;
use tvmc::synth::{generate, GenParams, SyntheticKind};

fn main() -> tvmc::Result<()> {
    let seq = generate(&GenParams {
        kind: SyntheticKind::TwistingBar,
        reindex: true,
        ..GenParams::default()
    })?;
    let cfg = CodecConfig::default();
    let encoded = encode_sequence(&seq, &cfg)?;
    let decoded = decode_sequence(&encoded.bytes)?;

    println!("{:>5} {:>5} {:>6} {:>7} {:>7} {:>8}", "frame", "kind", "base", "motion", "disp", "D1 dB");
    for (f, (orig, dec)) in encoded.report.frames.iter().zip(seq.frames().iter().zip(decoded.frames())) {
        let q = mesh_quality(orig, dec, 20_000, 0)?;
        println!(
            "{:>5} {:>5} {:>6} {:>7} {:>7} {:>8.2}",
            f.frame,
            format!("{:?}", f.kind).to_lowercase(),
            f.base_bytes,
            f.motion_bytes,
            f.displacement_bytes,
            q.d1_db
        );
    }
    println!(
        "{} bytes total ({} header, {} framing)",
        encoded.report.total_bytes, encoded.report.header_bytes, encoded.report.overhead_bytes
    );
    Ok(())
}
