//! Geometric distortion (D1 point-to-point, D2 point-to-plane) and BD-rate.
//!
//! Surfaces are compared as sampled point sets. Each directed error is the
//! mean squared distance from the points of one set to their nearest
//! neighbours in the other; the symmetric error is the larger direction.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spatial::{VertexOctree, DEFAULT_LEAF_CAPACITY};
use crate::{Error, Mesh, Result, Vec3};

/// Reported in place of an infinite PSNR.
pub const PSNR_CAP: f64 = 999.0;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSet {
    pub points: Vec<Vec3>,
    /// Unit normals, one per point, when known.
    pub normals: Option<Vec<Vec3>>,
}

impl PointSet {
    pub fn new(points: Vec<Vec3>) -> Self {
        PointSet {
            points,
            normals: None,
        }
    }

    pub fn with_normals(points: Vec<Vec3>, normals: Vec<Vec3>) -> Result<Self> {
        if points.len() != normals.len() {
            return Err(Error::InvalidInput(format!(
                "{} points but {} normals",
                points.len(),
                normals.len()
            )));
        }
        Ok(PointSet {
            points,
            normals: Some(normals),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Area-weighted uniform samples of the surface, each carrying the normal of
/// the face it was drawn from. Deterministic for a given `seed`.
pub fn sample_surface(mesh: &Mesh, count: usize, seed: u64) -> Result<PointSet> {
    let mut cumulative = Vec::with_capacity(mesh.faces.len());
    let mut total = 0.0;
    for f in 0..mesh.faces.len() {
        total += mesh.face_area(f);
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::InvalidInput("cannot sample a surface with zero area".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    let mut normals = Vec::with_capacity(count);
    for _ in 0..count {
        let x = rng.random::<f64>() * total;
        let f = cumulative
            .partition_point(|&c| c <= x)
            .min(cumulative.len() - 1);
        // Zero-area faces occupy no interval, so `f` always has positive area.
        let [a, b, c] = mesh.triangle(f);
        let (r1, r2): (f64, f64) = (rng.random(), rng.random());
        let s = r1.sqrt();
        points.push(a * (1.0 - s) + b * (s * (1.0 - r2)) + c * (s * r2));
        normals.push(mesh.face_cross(f).normalize());
    }
    PointSet::with_normals(points, normals)
}

fn check_sets(a: &PointSet, b: &PointSet) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("distortion needs two non-empty point sets".into()));
    }
    Ok(())
}

/// Mean over `from` of the squared distance to the nearest point of `to`,
/// optionally projected on a normal chosen by `(from index, to index)`.
fn directed_mse(
    from: &[Vec3],
    to: &[Vec3],
    normal: Option<&dyn Fn(usize, usize) -> Vec3>,
) -> Result<f64> {
    let tree = VertexOctree::build(to, DEFAULT_LEAF_CAPACITY)?;
    let mut sum = 0.0;
    for (i, p) in from.iter().enumerate() {
        let (j, _) = tree.nearest(p);
        let diff = to[j] - p;
        sum += match normal {
            None => diff.norm_squared(),
            Some(n) => diff.dot(&n(i, j)).powi(2),
        };
    }
    Ok(sum / from.len() as f64)
}

pub fn psnr(mse: f64, peak: f64) -> f64 {
    if mse <= 0.0 {
        return PSNR_CAP;
    }
    (10.0 * (peak * peak / mse).log10()).min(PSNR_CAP)
}

/// Symmetric point-to-point mean squared error.
pub fn d1_mse(a: &PointSet, b: &PointSet) -> Result<f64> {
    check_sets(a, b)?;
    Ok(directed_mse(&a.points, &b.points, None)?.max(directed_mse(&b.points, &a.points, None)?))
}

/// Symmetric point-to-plane mean squared error, projecting on the normals of
/// `a` in both directions.
pub fn d2_mse(a: &PointSet, b: &PointSet) -> Result<f64> {
    check_sets(a, b)?;
    let normals = a
        .normals
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("point-to-plane error needs normals on the reference".into()))?;
    let ab = directed_mse(&a.points, &b.points, Some(&|i, _| normals[i]))?;
    let ba = directed_mse(&b.points, &a.points, Some(&|_, j| normals[j]))?;
    Ok(ab.max(ba))
}

pub fn d1_psnr(a: &PointSet, b: &PointSet, peak: f64) -> Result<f64> {
    Ok(psnr(d1_mse(a, b)?, peak))
}

pub fn d2_psnr(a: &PointSet, b: &PointSet, peak: f64) -> Result<f64> {
    Ok(psnr(d2_mse(a, b)?, peak))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FrameQuality {
    pub d1_db: f64,
    pub d2_db: f64,
}

/// D1/D2 PSNR of `decoded` against `reference`, with the reference's bounding
/// box diagonal as peak. Both surfaces are sampled with `seed`, so identical
/// meshes give identical samples and the capped PSNR.
pub fn mesh_quality(reference: &Mesh, decoded: &Mesh, samples: usize, seed: u64) -> Result<FrameQuality> {
    let a = sample_surface(reference, samples, seed)?;
    let b = sample_surface(decoded, samples, seed)?;
    let peak = reference.bbox().diagonal();
    Ok(FrameQuality {
        d1_db: d1_psnr(&a, &b, peak)?,
        d2_db: d2_psnr(&a, &b, peak)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RdPoint {
    pub rate: f64,
    pub quality: f64,
}

/// Rate-distortion points sorted by rate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RdCurve {
    pub points: Vec<RdPoint>,
}

impl RdCurve {
    pub fn new(mut points: Vec<RdPoint>) -> Self {
        points.sort_by(|a, b| a.rate.total_cmp(&b.rate));
        RdCurve { points }
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self::new(
            pairs
                .iter()
                .map(|&(rate, quality)| RdPoint { rate, quality })
                .collect(),
        )
    }
}

/// Least-squares cubic through `(x, y)`, lowest order coefficient first.
fn fit_cubic(x: &[f64], y: &[f64]) -> Result<[f64; 4]> {
    let a = DMatrix::from_fn(x.len(), 4, |r, c| x[r].powi(c as i32));
    let b = DVector::from_column_slice(y);
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::InvalidInput(format!("cubic fit failed: {e}")))?;
    Ok([sol[0], sol[1], sol[2], sol[3]])
}

fn integrate_cubic(c: &[f64; 4], lo: f64, hi: f64) -> f64 {
    let antiderivative = |x: f64| c[0] * x + c[1] * x.powi(2) / 2.0 + c[2] * x.powi(3) / 3.0 + c[3] * x.powi(4) / 4.0;
    antiderivative(hi) - antiderivative(lo)
}

/// Average rate difference of `test` against `anchor` at equal quality, in
/// percent. Negative values are savings.
pub fn bd_rate(anchor: &RdCurve, test: &RdCurve) -> Result<f64> {
    let prep = |c: &RdCurve, name: &str| -> Result<(Vec<f64>, Vec<f64>)> {
        if c.points.len() < 4 {
            return Err(Error::InvalidInput(format!("{name} curve needs at least 4 points")));
        }
        if c.points.iter().any(|p| !(p.rate > 0.0) || !p.quality.is_finite()) {
            return Err(Error::InvalidInput(format!("{name} curve has a non-positive rate or non-finite quality")));
        }
        Ok((
            c.points.iter().map(|p| p.quality).collect(),
            c.points.iter().map(|p| p.rate.log10()).collect(),
        ))
    };
    let (qa, ra) = prep(anchor, "anchor")?;
    let (qt, rt) = prep(test, "test")?;
    let range = |q: &[f64]| q.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    let (la, ha) = range(&qa);
    let (lt, ht) = range(&qt);
    let (lo, hi) = (la.max(lt), ha.min(ht));
    if !(hi > lo) {
        return Err(Error::InvalidInput("RD curves do not overlap in quality".into()));
    }
    let ca = fit_cubic(&qa, &ra)?;
    let ct = fit_cubic(&qt, &rt)?;
    let avg = (integrate_cubic(&ct, lo, hi) - integrate_cubic(&ca, lo, hi)) / (hi - lo);
    Ok((10f64.powf(avg) - 1.0) * 100.0)
}

/// One CSV row of an RD sweep.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RdRow {
    pub rate_bits: u64,
    pub frame_count: usize,
    pub d1_db: f64,
    pub d2_db: f64,
}

pub const RD_CSV_HEADER: &str = "rate_bits,frame_count,d1_db,d2_db";

pub fn rd_csv(rows: &[RdRow]) -> String {
    let mut out = String::from(RD_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{:.4},{:.4}\n", r.rate_bits, r.frame_count, r.d1_db, r.d2_db));
    }
    out
}

/// Draws `n` points uniformly from the unit cube; used by examples and tests.
pub fn random_points(n: usize, rng: &mut impl Rng) -> Vec<Vec3> {
    (0..n)
        .map(|_| Vec3::new(rng.random(), rng.random(), rng.random()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(a: &[Vec3], b: &[Vec3]) -> f64 {
        a.iter()
            .map(|p| {
                b.iter()
                    .map(|q| (q - p).norm_squared())
                    .fold(f64::INFINITY, f64::min)
            })
            .sum::<f64>()
            / a.len() as f64
    }

    #[test]
    fn identical_sets_hit_the_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = PointSet::new(random_points(50, &mut rng));
        assert_eq!(d1_psnr(&a, &a, 1.0).unwrap(), PSNR_CAP);
    }

    #[test]
    fn translation_closed_form() {
        // Points 10 apart, shifted by 0.1: every nearest neighbour is the
        // shifted copy.
        let a: Vec<Vec3> = (0..20).map(|i| Vec3::new(10.0 * i as f64, 0.0, 0.0)).collect();
        let t = Vec3::new(0.0, 0.1, 0.0);
        let b: Vec<Vec3> = a.iter().map(|p| p + t).collect();
        let (a, b) = (PointSet::new(a), PointSet::new(b));
        assert!((d1_mse(&a, &b).unwrap() - 0.01).abs() < 1e-15);
        let expect = 10.0 * (4.0f64 / 0.01).log10();
        assert!((d1_psnr(&a, &b, 2.0).unwrap() - expect).abs() < 1e-9);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_points(60, &mut rng);
        let b = random_points(80, &mut rng);
        let expect = brute(&a, &b).max(brute(&b, &a));
        assert_eq!(d1_mse(&PointSet::new(a), &PointSet::new(b)).unwrap(), expect);
    }

    #[test]
    fn tangential_offsets_vanish_in_d2() {
        let pts: Vec<Vec3> = (0..10).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        let normals = vec![Vec3::z(); pts.len()];
        let a = PointSet::with_normals(pts.clone(), normals).unwrap();
        let b = PointSet::new(pts.iter().map(|p| p + Vec3::new(0.0, 0.05, 0.0)).collect());
        assert_eq!(d2_mse(&a, &b).unwrap(), 0.0);
        assert!(d1_mse(&a, &b).unwrap() > 0.0);
        let c = PointSet::new(pts.iter().map(|p| p + Vec3::new(0.0, 0.0, 0.05)).collect());
        assert!((d2_mse(&a, &c).unwrap() - d1_mse(&a, &c).unwrap()).abs() < 1e-18);
        assert!(d2_mse(&PointSet::new(pts), &c).is_err());
    }

    #[test]
    fn sampling_properties() {
        let tri = Mesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::y()], vec![[0, 1, 2]]).unwrap();
        let s = sample_surface(&tri, 100, 5).unwrap();
        assert!(s.points.iter().all(|p| p.x >= 0.0 && p.y >= 0.0 && p.x + p.y <= 1.0 + 1e-12 && p.z == 0.0));
        assert!(sample_surface(&tri, 0, 5).unwrap().is_empty());
        assert_eq!(sample_surface(&tri, 10, 5).unwrap(), sample_surface(&tri, 10, 5).unwrap());
        let flat = Mesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::x() * 2.0], vec![[0, 1, 2]]).unwrap();
        assert!(sample_surface(&flat, 10, 0).is_err());
    }

    #[test]
    fn area_weighting() {
        // Areas 1 and 3: expected 25/75 split of 1000 samples.
        let m = Mesh::new(
            vec![
                Vec3::zeros(),
                Vec3::new(2.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(10.0, 0.0, 0.0),
                Vec3::new(12.0, 0.0, 0.0),
                Vec3::new(10.0, 3.0, 0.0),
            ],
            vec![[0, 1, 2], [3, 4, 5]],
        )
        .unwrap();
        let s = sample_surface(&m, 1000, 11).unwrap();
        let first = s.points.iter().filter(|p| p.x < 5.0).count() as f64;
        let sigma = (1000.0 * 0.25 * 0.75f64).sqrt();
        assert!((first - 250.0).abs() <= 3.0 * sigma, "{first}");
    }

    #[test]
    fn bd_rate_basics() {
        let anchor = RdCurve::from_pairs(&[(100.0, 30.0), (200.0, 34.0), (400.0, 37.0), (800.0, 39.5)]);
        assert!(bd_rate(&anchor, &anchor).unwrap().abs() < 1e-9);
        let half = RdCurve::new(
            anchor
                .points
                .iter()
                .map(|p| RdPoint { rate: p.rate / 2.0, quality: p.quality })
                .collect(),
        );
        assert!((bd_rate(&anchor, &half).unwrap() + 50.0).abs() < 1e-9);
        let far = RdCurve::from_pairs(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0), (4.0, 4.0)]);
        assert!(bd_rate(&anchor, &far).is_err());
        assert!(bd_rate(&anchor, &RdCurve::from_pairs(&[(1.0, 30.0)])).is_err());
    }

    #[test]
    fn csv_layout() {
        let rows = [RdRow { rate_bits: 800, frame_count: 10, d1_db: 50.0, d2_db: 55.5 }];
        assert_eq!(rd_csv(&rows), "rate_bits,frame_count,d1_db,d2_db\n800,10,50.0000,55.5000\n");
    }
}
