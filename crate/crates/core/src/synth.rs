//! Analytic test sequences: a deforming, drifting sphere and a twisting bar.
//!
//! With `reindex`, every frame drops a few vertices (re-triangulating the
//! holes) and shuffles vertex and face order, so consecutive frames have
//! different vertex counts and no shared indexing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::subdivision::subdivide_midpoint;
use crate::{AdjacencyMap, Error, Mesh, MeshSequence, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    DeformingSphere,
    TwistingBar,
}

impl std::str::FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deforming_sphere" => Ok(SyntheticKind::DeformingSphere),
            "twisting_bar" => Ok(SyntheticKind::TwistingBar),
            other => Err(Error::InvalidInput(format!("unknown sequence kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub kind: SyntheticKind,
    pub frames: usize,
    /// Approximate vertex count; the closest available subdivision level is used.
    pub vertices: usize,
    pub reindex: bool,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            kind: SyntheticKind::DeformingSphere,
            frames: 10,
            vertices: 642,
            reindex: false,
            seed: 0,
        }
    }
}

/// Unit icosphere: the icosahedron midpoint-subdivided `level` times and
/// projected back onto the sphere. Has `10 * 4^level + 2` vertices.
pub fn icosphere(level: usize) -> Mesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let vertices = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let (mut mesh, _) = subdivide_midpoint(&Mesh { vertices, faces }, level);
    for v in mesh.vertices.iter_mut() {
        *v = v.normalize();
    }
    mesh
}

/// Unit latitude-longitude sphere with `segments` meridians and `rings`
/// latitude bands. Vertex density grows towards the two poles, whose valence
/// is `segments`.
pub fn uv_sphere(segments: usize, rings: usize) -> Mesh {
    assert!(segments >= 3 && rings >= 2);
    let mut vertices = vec![Vec3::z()];
    for r in 1..rings {
        let theta = std::f64::consts::PI * r as f64 / rings as f64;
        for s in 0..segments {
            let phi = std::f64::consts::TAU * s as f64 / segments as f64;
            vertices.push(Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()));
        }
    }
    vertices.push(-Vec3::z());
    let south = vertices.len() - 1;
    let ring = |r: usize, s: usize| 1 + (r - 1) * segments + s % segments;
    let mut faces = Vec::new();
    for s in 0..segments {
        faces.push([0, ring(1, s), ring(1, s + 1)]);
        for r in 1..rings - 1 {
            let (a, b) = (ring(r, s), ring(r, s + 1));
            let (c, d) = (ring(r + 1, s), ring(r + 1, s + 1));
            faces.push([a, c, d]);
            faces.push([a, d, b]);
        }
        faces.push([south, ring(rings - 1, s + 1), ring(rings - 1, s)]);
    }
    Mesh { vertices, faces }
}

/// Axis-aligned cube `[-1, 1]^3` midpoint-subdivided `level` times
/// (`6 * 4^level + 2` vertices).
pub fn subdivided_cube(level: usize) -> Mesh {
    let vertices = (0..8)
        .map(|k| {
            Vec3::new(
                if k & 1 != 0 { 1.0 } else { -1.0 },
                if k & 2 != 0 { 1.0 } else { -1.0 },
                if k & 4 != 0 { 1.0 } else { -1.0 },
            )
        })
        .collect();
    let faces = vec![
        [0, 2, 3],
        [0, 3, 1],
        [4, 5, 7],
        [4, 7, 6],
        [0, 1, 5],
        [0, 5, 4],
        [2, 6, 7],
        [2, 7, 3],
        [0, 4, 6],
        [0, 6, 2],
        [1, 3, 7],
        [1, 7, 5],
    ];
    subdivide_midpoint(&Mesh { vertices, faces }, level).0
}

fn closest_level(requested: usize, count: impl Fn(usize) -> usize) -> usize {
    (0..8)
        .min_by_key(|&l| count(l).abs_diff(requested))
        .unwrap()
}

/// Surface of the deforming sphere at frame `t`, evaluated on the unit
/// directions of `directions`.
fn sphere_frame(directions: &Mesh, t: f64) -> Mesh {
    let drift = Vec3::new(0.04 * t, 0.016 * (0.5 * t).sin(), 0.0);
    let vertices = directions
        .vertices
        .iter()
        .map(|u| {
            let r = 1.0
                + 0.1 * (2.5 * u.y + 0.4 * t).sin() * (1.5 * u.x).cos()
                + 0.04 * (3.0 * u.z - 0.28 * t).cos();
            u * r + drift
        })
        .collect();
    Mesh {
        vertices,
        faces: directions.faces.clone(),
    }
}

fn bar_frame(cube: &Mesh, t: f64) -> Mesh {
    let amplitude = 0.4 * (0.25 * t).sin();
    let vertices = cube
        .vertices
        .iter()
        .map(|c| {
            let (x, y, z) = (2.0 * c.x, 0.5 * c.y, 0.5 * c.z);
            let angle = amplitude * x / 2.0;
            let (s, co) = angle.sin_cos();
            Vec3::new(x, co * y - s * z, s * y + co * z)
        })
        .collect();
    Mesh {
        vertices,
        faces: cube.faces.clone(),
    }
}

pub fn generate(params: &GenParams) -> Result<MeshSequence> {
    if params.frames == 0 {
        return Err(Error::InvalidInput("frames must be at least 1".into()));
    }
    if params.vertices < 8 {
        return Err(Error::InvalidInput("vertices must be at least 8".into()));
    }
    let rest = match params.kind {
        SyntheticKind::DeformingSphere => {
            icosphere(closest_level(params.vertices, |l| 10 * 4usize.pow(l as u32) + 2))
        }
        SyntheticKind::TwistingBar => {
            subdivided_cube(closest_level(params.vertices, |l| 6 * 4usize.pow(l as u32) + 2))
        }
    };
    let frames = (0..params.frames)
        .map(|t| {
            let frame = match params.kind {
                SyntheticKind::DeformingSphere => sphere_frame(&rest, t as f64),
                SyntheticKind::TwistingBar => bar_frame(&rest, t as f64),
            };
            if params.reindex {
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let drop = (frame.vertices.len() / 100).max(1) + t % 2;
                reindex(&frame, drop, &mut rng)
            } else {
                frame
            }
        })
        .collect();
    MeshSequence::new(frames)
}

/// Removes up to `drop` vertices of a closed manifold mesh (fan-filling each
/// hole) and shuffles vertex and face order.
pub fn reindex(mesh: &Mesh, drop: usize, rng: &mut impl Rng) -> Mesh {
    let mut faces = mesh.faces.clone();
    let mut alive = vec![true; mesh.vertices.len()];
    let mut order: Vec<usize> = (0..mesh.vertices.len()).collect();
    order.shuffle(rng);
    let mut removed = 0;
    for v in order {
        if removed == drop {
            break;
        }
        let current = Mesh {
            vertices: mesh.vertices.clone(),
            faces: faces.clone(),
        };
        let adj = AdjacencyMap::build(&current);
        if adj.valence(v) < 4 {
            continue;
        }
        let Some(fill) = fill_hole(&current, &adj, v) else {
            continue;
        };
        let star = adj.incident_faces(v);
        faces = faces
            .iter()
            .enumerate()
            .filter(|(f, _)| star.binary_search(f).is_err())
            .map(|(_, f)| *f)
            .chain(fill)
            .collect();
        alive[v] = false;
        removed += 1;
    }

    let mut perm: Vec<usize> = (0..mesh.vertices.len()).filter(|&v| alive[v]).collect();
    perm.shuffle(rng);
    let mut remap = vec![usize::MAX; mesh.vertices.len()];
    for (new, &old) in perm.iter().enumerate() {
        remap[old] = new;
    }
    faces.shuffle(rng);
    let faces = faces
        .into_iter()
        .map(|f| {
            let f = f.map(|i| remap[i]);
            let r = rng.random_range(0..3);
            [f[r], f[(r + 1) % 3], f[(r + 2) % 3]]
        })
        .collect();
    Mesh {
        vertices: perm.iter().map(|&i| mesh.vertices[i]).collect(),
        faces,
    }
}

/// Fan triangulation of the hole left by removing `v`, or `None` when the
/// 1-ring is not a simple cycle or every fan would duplicate an edge.
fn fill_hole(mesh: &Mesh, adj: &AdjacencyMap, v: usize) -> Option<Vec<[usize; 3]>> {
    let mut next = std::collections::HashMap::new();
    for &f in adj.incident_faces(v) {
        let face = mesh.faces[f];
        let k = face.iter().position(|&i| i == v)?;
        let (a, b) = (face[(k + 1) % 3], face[(k + 2) % 3]);
        if next.insert(a, b).is_some() {
            return None;
        }
    }
    let start = *adj.neighbors(v).first()?;
    let mut ring = vec![start];
    let mut cur = start;
    loop {
        cur = *next.get(&cur)?;
        if cur == start {
            break;
        }
        if ring.len() > next.len() {
            return None;
        }
        ring.push(cur);
    }
    if ring.len() != adj.valence(v) || ring.len() != next.len() {
        return None;
    }
    let k = ring.len();
    'apex: for shift in 0..k {
        let r: Vec<usize> = (0..k).map(|i| ring[(i + shift) % k]).collect();
        for &w in &r[2..k - 1] {
            if adj.neighbors(r[0]).binary_search(&w).is_ok() {
                continue 'apex;
            }
        }
        return Some((1..k - 1).map(|i| [r[0], r[i], r[i + 1]]).collect());
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uv_sphere_is_closed_and_outward() {
        let m = uv_sphere(16, 8);
        assert_eq!(m.vertices.len(), 2 + 16 * 7);
        assert_eq!(m.vertices.len() as i64 - m.edges().len() as i64 + m.faces.len() as i64, 2);
        for f in 0..m.faces.len() {
            let c = m.triangle(f).iter().sum::<Vec3>() / 3.0;
            assert!(m.face_cross(f).dot(&c) > 0.0, "face {f}");
        }
        assert_eq!(AdjacencyMap::build(&m).valence(0), 16);
    }

    #[test]
    fn icosphere_counts() {
        for (level, v) in [(0, 12), (1, 42), (2, 162), (3, 642)] {
            let m = icosphere(level);
            assert_eq!(m.vertices.len(), v);
            assert_eq!(m.faces.len(), 20 * 4usize.pow(level as u32));
            assert!(m.vertices.iter().all(|p| (p.norm() - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn icosphere_faces_point_outward() {
        let m = icosphere(2);
        for f in 0..m.faces.len() {
            let [a, b, c] = m.triangle(f);
            assert!(m.face_cross(f).dot(&(a + b + c)) > 0.0);
        }
    }

    #[test]
    fn static_connectivity_without_reindex() {
        let seq = generate(&GenParams::default()).unwrap();
        assert_eq!(seq.len(), 10);
        let f0 = &seq.frames()[0];
        assert_eq!(f0.vertices.len(), 642);
        assert!(seq.frames().iter().all(|f| f.faces == f0.faces));
    }

    #[test]
    fn reindexed_frames_change_vertex_count() {
        let seq = generate(&GenParams {
            reindex: true,
            ..GenParams::default()
        })
        .unwrap();
        for w in seq.frames().windows(2) {
            assert_ne!(w[0].vertices.len(), w[1].vertices.len());
        }
        for f in seq.frames() {
            let report = f.validate().unwrap();
            assert!(report.degenerate_faces.is_empty());
            // Closed surface: V - E + F = 2.
            let euler = f.vertices.len() as i64 - f.edges().len() as i64 + f.faces.len() as i64;
            assert_eq!(euler, 2);
        }
    }

    #[test]
    fn bar_and_single_frame() {
        let seq = generate(&GenParams {
            kind: SyntheticKind::TwistingBar,
            frames: 1,
            vertices: 386,
            ..GenParams::default()
        })
        .unwrap();
        assert_eq!(seq.len(), 1);
        assert_eq!(seq.frames()[0].vertices.len(), 386);
        assert!(generate(&GenParams { frames: 0, ..GenParams::default() }).is_err());
    }
}
