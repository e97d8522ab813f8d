//! Adaptive binary arithmetic coding and the integer field coders.
//!
//! `cargo run --example entropy_coding`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tvmc::entropy::{ac_decode, ac_encode, decode_motion_ints, encode_motion_ints};

fn main() -> tvmc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for p in [0.5, 0.2, 0.05, 0.01] {
        let bits: Vec<(usize, bool)> = (0..10_000).map(|_| (0, rng.random_bool(p))).collect();
        let coded = ac_encode(&bits);
        let back = ac_decode(&coded, &vec![0; bits.len()])?;
        assert!(back.iter().zip(&bits).all(|(a, (_, b))| a == b));
        let h = -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
        println!("p = {p:<5} entropy {h:.3} bits, coded {:.3} bits/symbol", coded.len() as f64 * 8.0 / 1e4);
    }

    let small: Vec<[i32; 3]> = (0..1000).map(|_| [rng.random_range(-2..=2), 0, rng.random_range(-1..=1)]).collect();
    let bytes = encode_motion_ints(&small);
    assert_eq!(decode_motion_ints(&bytes)?, small);
    println!("1000 small motion vectors: {} bytes", bytes.len());
    Ok(())
}
