use std::io::Write;

use super::{Mesh, Vec3};
use crate::{Error, Result};

/// Parses ASCII OBJ. Only `v` and `f` records are kept; texture coordinates,
/// normals, groups and materials are skipped.
pub fn read_obj(data: &[u8]) -> Result<Mesh> {
    let text = std::str::from_utf8(data).map_err(|e| {
        Error::parse(format!("byte {}", e.valid_up_to()), "OBJ is not valid UTF-8")
    })?;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let loc = || format!("line {}", lineno + 1);
        let line = line.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut p = [0.0; 3];
                for c in p.iter_mut() {
                    let tok = tokens
                        .next()
                        .ok_or_else(|| Error::parse(loc(), "vertex needs three coordinates"))?;
                    *c = tok
                        .parse()
                        .map_err(|_| Error::parse(loc(), format!("bad coordinate `{tok}`")))?;
                }
                vertices.push(Vec3::from(p));
            }
            Some("f") => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    return Err(Error::parse(
                        loc(),
                        format!("face has {} vertices, only triangles are supported", refs.len()),
                    ));
                }
                let mut face = [0usize; 3];
                for (slot, r) in face.iter_mut().zip(&refs) {
                    let idx_tok = r.split('/').next().unwrap_or("");
                    let idx: i64 = idx_tok
                        .parse()
                        .map_err(|_| Error::parse(loc(), format!("bad face index `{r}`")))?;
                    let n = vertices.len() as i64;
                    let resolved = match idx {
                        i if i > 0 => i - 1,
                        i if i < 0 => n + i,
                        _ => return Err(Error::parse(loc(), "face index 0 is invalid in OBJ")),
                    };
                    if resolved < 0 {
                        return Err(Error::parse(loc(), format!("face index {idx} out of range")));
                    }
                    *slot = resolved as usize;
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    let mesh = Mesh { vertices, faces };
    mesh.validate()?;
    Ok(mesh)
}

/// Writes ASCII OBJ using shortest round-trip float formatting.
pub fn write_obj(mesh: &Mesh, out: &mut impl Write) -> std::io::Result<()> {
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for f in &mesh.faces {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}
