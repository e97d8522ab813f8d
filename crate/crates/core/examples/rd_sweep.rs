//! Inter against intra-only coding over the standard rate points.
//!
//! Run with `cargo run --release --example rd_sweep`.

use tvmc::bitstream::{CodecConfig, RATE_POINTS};
use tvmc::commands::sweep;
use tvmc::synth::{generate, GenParams};

fn main() -> tvmc::Result<()> {
    let seq = generate(&GenParams {
        reindex: true,
        ..GenParams::default()
    })?;
    let report = sweep(&seq, &CodecConfig::default(), &RATE_POINTS, 20_000, 0)?;
    println!("{:>6} {:>10} {:>8} {:>10} {:>8}", "rho", "inter bits", "D1 dB", "intra bits", "D1 dB");
    for ((rho, a), b) in RATE_POINTS.iter().zip(&report.inter).zip(&report.intra) {
        println!(
            "{rho:>6} {:>10} {:>8.2} {:>10} {:>8.2}",
            a.rate_bits, a.d1_db, b.rate_bits, b.d1_db
        );
    }
    if let Some(bd) = report.bd_rate_d1 {
        println!("BD-rate (D1) inter vs intra: {bd:.2}%");
    }
    Ok(())
}
