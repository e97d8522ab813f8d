//! Write a mesh as OBJ and binary PLY, read both back, and inspect its
//! adjacency.
//!
//! `cargo run --example mesh_io`

use tvmc::mesh::{read_obj, read_ply, write_obj, write_ply, PlyEncoding};
use tvmc::synth::icosphere;
use tvmc::AdjacencyMap;

fn main() -> tvmc::Result<()> {
    let mesh = icosphere(2);
    let mut obj = Vec::new();
    write_obj(&mesh, &mut obj).expect("in-memory write");
    let mut ply = Vec::new();
    write_ply(&mesh, PlyEncoding::BinaryLittleEndian, &mut ply).expect("in-memory write");

    let from_obj = read_obj(&obj)?;
    let from_ply = read_ply(&ply)?;
    println!("obj: {} bytes, {} vertices, {} faces", obj.len(), from_obj.vertex_count(), from_obj.face_count());
    println!("ply: {} bytes, {} vertices, {} faces", ply.len(), from_ply.vertex_count(), from_ply.face_count());
    println!("binary PLY is lossless: {}", from_ply == mesh);

    let report = mesh.validate()?;
    println!("{report:?}");
    let adj = AdjacencyMap::build(&mesh);
    let mut histogram = std::collections::BTreeMap::new();
    for v in 0..adj.vertex_count() {
        *histogram.entry(adj.valence(v)).or_insert(0) += 1;
    }
    println!("valence histogram: {histogram:?}");
    Ok(())
}
