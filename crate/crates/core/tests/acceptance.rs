//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Verdicts are reported, not enforced through the exit status; the process
//! exits non-zero only if the harness itself cannot run.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tvmc::align::AnchorMesh;
use tvmc::bitstream::{
    decode_sequence, decode_sequence_detailed, encode_sequence, AnchorPipeline, CodecConfig,
    FrameKind, RATE_POINTS,
};
use tvmc::entropy::{
    ac_decode, ac_encode, decode_displacement_field, decode_motion_ints, encode_displacement_field,
    encode_motion_ints,
};
use tvmc::metrics::{
    bd_rate, d1_mse, d1_psnr, d2_mse, d2_psnr, mesh_quality, psnr, PointSet, RdCurve, RdPoint,
    DEFAULT_SAMPLES,
};
use tvmc::motion::{
    generate_coarse_anchor, kalman_gain, KalmanParams, KalmanState, MotionField,
};
use tvmc::qem::{optimal_position, Quadric};
use tvmc::spatial::{VertexOctree, DEFAULT_LEAF_CAPACITY};
use tvmc::subdivision::{QuantMode, SubdivisionPlan};
use tvmc::synth::{generate, icosphere, uv_sphere, GenParams, SyntheticKind};
use tvmc::{Mesh, MeshSequence, Vec3};

// Budgets and tolerances, all fixed by the acceptance criteria.
const TOPOLOGY_BUDGET: Duration = Duration::from_secs(1);
const BOUND_BUDGET: Duration = Duration::from_secs(60);
const BOUND_CONFIGS: usize = 50;
const KALMAN_TOL: f64 = 1e-12;
const QEM_TRIALS: usize = 10_000;
const QEM_TOL: f64 = 1e-9;
const METRIC_TRIALS: usize = 100;
const METRIC_MAX_POINTS: usize = 100;
const BD_HALF_RATE: f64 = -50.0;
// 0.1% of the expected value.
const BD_TOL: f64 = 0.05;
const ENTROPY_FIELDS: usize = 1000;
const SKEWED_BITS_PER_SYMBOL: f64 = 0.33;
const INTER_D1_SLACK_DB: f64 = 0.5;
const MATCHED_SIZE: f64 = 0.05;
const PERF_BUDGET: Duration = Duration::from_secs(60);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

type Check = fn() -> tvmc::Result<Verdict>;

fn sphere_sequence() -> MeshSequence {
    generate(&GenParams {
        kind: SyntheticKind::DeformingSphere,
        frames: 10,
        vertices: 642,
        reindex: true,
        seed: 0,
    })
    .expect("synthetic sphere")
}

fn topology_consistency() -> tvmc::Result<Verdict> {
    let seq = sphere_sequence();
    let enc = encode_sequence(&seq, &CodecConfig::default())?;
    let start = Instant::now();
    let dec = decode_sequence_detailed(&enc.bytes)?;
    let mut checked = 0;
    let mut mismatches = 0;
    for (t, frame) in dec.frames.frames().iter().enumerate() {
        let gof_start = t - t % dec.config.gof_size;
        let base = Mesh {
            vertices: dec.anchors[gof_start].clone(),
            faces: enc.trace[gof_start].base_faces.clone(),
        };
        let expected = SubdivisionPlan::new(&base, dec.config.levels).faces;
        if enc.trace[t].kind == FrameKind::Inter {
            checked += 1;
            if frame.faces != expected {
                mismatches += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    Ok(verdict(
        checked == 8 && mismatches == 0 && elapsed < TOPOLOGY_BUDGET,
        format!("{checked} inter frames, {mismatches} connectivity mismatches, decode+check {elapsed:.2?}"),
    ))
}

fn closed_loop_mirror() -> tvmc::Result<Verdict> {
    let mut frames = 0;
    let mut mismatches = 0;
    for kind in [SyntheticKind::DeformingSphere, SyntheticKind::TwistingBar] {
        let seq = generate(&GenParams {
            kind,
            reindex: true,
            ..GenParams::default()
        })?;
        let enc = encode_sequence(&seq, &CodecConfig::default())?;
        let dec = decode_sequence_detailed(&enc.bytes)?;
        for (t, tr) in enc.trace.iter().enumerate() {
            frames += 1;
            if dec.anchors[t] != tr.anchor || dec.frames.frames()[t] != tr.reconstruction {
                mismatches += 1;
            }
        }
    }
    Ok(verdict(
        mismatches == 0,
        format!("{frames} frames, {mismatches} anchors or reconstructions differ"),
    ))
}

fn random_config(rng: &mut impl Rng) -> (GenParams, CodecConfig) {
    let params = GenParams {
        kind: if rng.random() {
            SyntheticKind::DeformingSphere
        } else {
            SyntheticKind::TwistingBar
        },
        frames: rng.random_range(2..=6),
        vertices: 162,
        reindex: rng.random(),
        seed: rng.random(),
    };
    let cfg = CodecConfig {
        gof_size: rng.random_range(1..=4),
        levels: rng.random_range(0..=2),
        rho: 2f64.powf(rng.random_range(4.0..12.0)),
        delta: rng.random_range(-0.45..0.45),
        hbar: rng.random_range(3..=9),
        kalman: if rng.random() {
            KalmanParams::LOW_MOTION
        } else {
            KalmanParams::HIGH_MOTION
        },
        injective: rng.random(),
        quant_mode: if rng.random() {
            QuantMode::Adaptive
        } else {
            QuantMode::Uniform
        },
        pipeline: [AnchorPipeline::Initial, AnchorPipeline::Coarse, AnchorPipeline::Fine]
            [rng.random_range(0..3)],
        ..CodecConfig::default()
    };
    (params, cfg)
}

fn distortion_bound() -> tvmc::Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let start = Instant::now();
    let mut violations = 0;
    let mut not_exact = 0;
    let mut vertices = 0usize;
    let mut worst = 0.0f64;
    for _ in 0..BOUND_CONFIGS {
        let (params, cfg) = random_config(&mut rng);
        let seq = generate(&params)?;
        let enc = encode_sequence(&seq, &cfg)?;
        let dec = decode_sequence(&enc.bytes)?;
        let extent = seq.bbox().max_extent();
        let position_half_step = 0.5 * extent / ((1u64 << cfg.position_bits) - 1) as f64;
        for (frame, tr) in dec.frames().iter().zip(&enc.trace) {
            if frame != &tr.reconstruction {
                not_exact += 1;
            }
            let min_scale = tr.scales.iter().copied().fold(f64::INFINITY, f64::min);
            let bound = 0.5 / min_scale + position_half_step;
            for (i, v) in frame.vertices.iter().enumerate() {
                let ideal = tr.subdivided.vertices[i] + tr.displacements.0[i];
                let err = (v - ideal).abs().max();
                worst = worst.max(err / bound);
                vertices += 1;
                if err > bound {
                    violations += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Ok(verdict(
        violations == 0 && not_exact == 0 && elapsed < BOUND_BUDGET,
        format!(
            "{BOUND_CONFIGS} configs, {vertices} vertices, {violations} bound violations, \
             {not_exact} frames differ from the encoder reconstruction, worst error {worst:.4} of the bound, {elapsed:.1?}"
        ),
    ))
}

fn kalman_limits() -> tvmc::Result<Verdict> {
    let state = |p: f64, pro: f64, sys: f64| KalmanState {
        p,
        sigma_pro: pro,
        sigma_sys: sys,
        prev_true_motion: None,
    };
    let sys_sweep: Vec<f64> = (1..=40).map(|k| 10f64.powi(-k)).collect();
    let gains: Vec<f64> = sys_sweep.iter().map(|&s| kalman_gain(&state(1e-2, 1e-3, s)).0).collect();
    let to_one = (1.0 - gains.last().unwrap()).abs() <= KALMAN_TOL;
    let rising = gains.windows(2).all(|w| w[1] >= w[0]);
    let hat_sweep: Vec<f64> = (1..=40).map(|k| 10f64.powi(-k)).collect();
    let gains0: Vec<f64> = hat_sweep.iter().map(|&h| kalman_gain(&state(0.0, h, 1e-4)).0).collect();
    let to_zero = gains0.last().unwrap().abs() <= KALMAN_TOL;
    let falling = gains0.windows(2).all(|w| w[1] <= w[0]);

    let reference = icosphere(3);
    let t = Vec3::new(0.3, -0.2, 0.1);
    let target = Mesh {
        vertices: reference.vertices.iter().map(|v| v + t).collect(),
        faces: reference.faces.clone(),
    };
    let octree = VertexOctree::build(&target.vertices, DEFAULT_LEAF_CAPACITY)?;
    let mut st = KalmanState::new(KalmanParams::LOW_MOTION);
    st.prev_true_motion = Some(MotionField(vec![t; reference.vertices.len()]));
    let coarse = generate_coarse_anchor(&reference, &octree, &st);
    let AnchorMesh { source_indices, .. } = &coarse.anchor;
    let mismatches = source_indices
        .as_ref()
        .map_or(usize::MAX, |s| s.iter().enumerate().filter(|&(i, &j)| i != j).count());
    Ok(verdict(
        to_one && rising && to_zero && falling && mismatches == 0,
        format!(
            "gain at sigma_sys=1e-40: {:.3e} from 1, at p_hat=1e-40: {:.3e}; monotone {}/{}; \
             translated {}-vertex icosphere: {mismatches} mismatches",
            1.0 - gains.last().unwrap(),
            gains0.last().unwrap(),
            rising,
            falling,
            reference.vertices.len()
        ),
    ))
}

fn random_unit(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn qem_optimality() -> tvmc::Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = 0;
    for _ in 0..QEM_TRIALS {
        let a = Vec3::new(rng.random(), rng.random(), rng.random());
        let b = a + random_unit(&mut rng) * rng.random_range(0.01..1.0);
        let mut q = Quadric::zero();
        for _ in 0..rng.random_range(1..=8) {
            let n = random_unit(&mut rng);
            let through = if rng.random() { a } else { b } + random_unit(&mut rng) * rng.random_range(0.0..0.1);
            q += Quadric::from_plane([n.x, n.y, n.z, -n.dot(&through)]);
        }
        let (p, e) = optimal_position(&q, &a, &b);
        let floor = q.error(&a).min(q.error(&b)).min(q.error(&((a + b) * 0.5)));
        if e > floor + QEM_TOL || (q.error(&p).max(0.0) - e).abs() > QEM_TOL {
            failures += 1;
        }
    }
    let corner = Vec3::new(1.0, 1.0, 1.0);
    let mut q = Quadric::zero();
    for n in [Vec3::x(), Vec3::y(), Vec3::z()] {
        q += Quadric::from_plane([n.x, n.y, n.z, -1.0]);
    }
    let (p, _) = optimal_position(&q, &Vec3::new(1.3, 0.8, 1.1), &Vec3::new(0.7, 1.2, 0.9));
    let corner_err = (p - corner).norm();
    Ok(verdict(
        failures == 0 && corner_err <= QEM_TOL,
        format!("{QEM_TRIALS} random edge quadrics, {failures} above the endpoint/midpoint floor; corner off by {corner_err:.1e}"),
    ))
}

fn brute_directed(from: &PointSet, to: &PointSet, normals: Option<&[Vec3]>, from_is_ref: bool) -> f64 {
    let mut sum = 0.0;
    for (i, p) in from.points.iter().enumerate() {
        let mut best = (usize::MAX, f64::INFINITY);
        for (j, q) in to.points.iter().enumerate() {
            let d = (q - p).norm_squared();
            if d < best.1 {
                best = (j, d);
            }
        }
        let diff = to.points[best.0] - p;
        sum += match normals {
            None => diff.norm_squared(),
            Some(n) => diff.dot(&n[if from_is_ref { i } else { best.0 }]).powi(2),
        };
    }
    sum / from.points.len() as f64
}

fn metric_oracles() -> tvmc::Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    let mut order_violations = 0;
    for _ in 0..METRIC_TRIALS {
        let na = rng.random_range(1..=METRIC_MAX_POINTS);
        let nb = rng.random_range(1..=METRIC_MAX_POINTS);
        let pts = |n: usize, rng: &mut ChaCha8Rng| -> Vec<Vec3> {
            (0..n).map(|_| Vec3::new(rng.random(), rng.random(), rng.random())).collect()
        };
        let a_pts = pts(na, &mut rng);
        let normals: Vec<Vec3> = (0..na).map(|_| random_unit(&mut rng)).collect();
        let a = PointSet::with_normals(a_pts, normals.clone())?;
        let b = PointSet::new(pts(nb, &mut rng));
        let d1 = brute_directed(&a, &b, None, true).max(brute_directed(&b, &a, None, false));
        let d2 = brute_directed(&a, &b, Some(&normals), true).max(brute_directed(&b, &a, Some(&normals), false));
        if d1_mse(&a, &b)? != d1 || d2_mse(&a, &b)? != d2 || d1_psnr(&a, &b, 2.0)? != psnr(d1, 2.0) {
            mismatches += 1;
        }
        if d2_psnr(&a, &b, 2.0)? < d1_psnr(&a, &b, 2.0)? {
            order_violations += 1;
        }
    }
    let anchor = RdCurve::from_pairs(&[(1000.0, 32.0), (1800.0, 35.5), (3300.0, 38.2), (6100.0, 40.1), (11000.0, 41.3)]);
    let half = RdCurve::new(anchor.points.iter().map(|p| RdPoint { rate: p.rate / 2.0, quality: p.quality }).collect());
    let same = bd_rate(&anchor, &anchor)?;
    let halved = bd_rate(&anchor, &half)?;
    Ok(verdict(
        mismatches == 0 && order_violations == 0 && same.abs() <= BD_TOL && (halved - BD_HALF_RATE).abs() <= BD_TOL,
        format!(
            "{METRIC_TRIALS} sets: {mismatches} brute-force mismatches, {order_violations} D2<D1; \
             bd_rate(x,x)={same:.2e}%, half rate {halved:.4}%"
        ),
    ))
}

fn entropy_round_trip() -> tvmc::Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = 0;
    for k in 0..ENTROPY_FIELDS {
        let n = rng.random_range(0..300);
        let scale: i64 = [1, 4, 100, 1 << 20, i32::MAX as i64][k % 5];
        let field: Vec<[i32; 3]> = (0..n)
            .map(|_| {
                let mut c = [0i32; 3];
                for x in &mut c {
                    *x = if rng.random_bool(0.3) { 0 } else { rng.random_range(-scale..=scale) as i32 };
                }
                c
            })
            .collect();
        let valences: Vec<usize> = (0..n).map(|_| rng.random_range(0..12)).collect();
        let q = tvmc::subdivision::QuantizedField(field.clone());
        let motion_ok = decode_motion_ints(&encode_motion_ints(&field)).ok() == Some(field.clone());
        let disp_ok = decode_displacement_field(&encode_displacement_field(&q, &valences)?, &valences).ok() == Some(q);
        if !(motion_ok && disp_ok) {
            failures += 1;
        }
    }
    let n = 10_000;
    let bits: Vec<(usize, bool)> = (0..n).map(|_| (0, rng.random_bool(0.05))).collect();
    let coded = ac_encode(&bits);
    let decoded = ac_decode(&coded, &vec![0; n])?;
    let lossless = decoded.iter().zip(&bits).all(|(d, (_, b))| d == b);
    let rate = coded.len() as f64 * 8.0 / n as f64;
    Ok(verdict(
        failures == 0 && lossless && rate <= SKEWED_BITS_PER_SYMBOL,
        format!("{ENTROPY_FIELDS} random fields, {failures} failures; 95%-zero stream {rate:.4} bits/symbol"),
    ))
}

fn sequence_d1(seq: &MeshSequence, decoded: &MeshSequence) -> tvmc::Result<f64> {
    let mut sum = 0.0;
    for (a, b) in seq.frames().iter().zip(decoded.frames()) {
        sum += mesh_quality(a, b, DEFAULT_SAMPLES, 0)?.d1_db;
    }
    Ok(sum / seq.len() as f64)
}

fn inter_benefit() -> tvmc::Result<Verdict> {
    let seq = sphere_sequence();
    let mut pass = true;
    let mut detail = Vec::new();
    for (k, &rho) in RATE_POINTS[..3].iter().enumerate() {
        let inter_cfg = CodecConfig { rho, ..CodecConfig::default() };
        let inter = encode_sequence(&seq, &inter_cfg)?;
        let intra = encode_sequence(&seq, &inter_cfg.intra_only())?;
        let d_inter = sequence_d1(&seq, &decode_sequence(&inter.bytes)?)?;
        let d_intra = sequence_d1(&seq, &decode_sequence(&intra.bytes)?)?;
        let ok = inter.bytes.len() < intra.bytes.len() && d_inter >= d_intra - INTER_D1_SLACK_DB;
        pass &= ok;
        detail.push(format!(
            "R{}: {} vs {} bytes, D1 {:.2} vs {:.2} dB",
            k + 1,
            inter.bytes.len(),
            intra.bytes.len(),
            d_inter,
            d_intra
        ));
    }
    Ok(verdict(pass, detail.join("; ")))
}

/// Linear interpolation of quality at `rate` on a log-rate axis.
fn quality_at(curve: &[(f64, f64)], rate: f64) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let (r0, q0) = w[0];
        let (r1, q1) = w[1];
        (rate >= r0 && rate <= r1).then(|| {
            let s = if r1 > r0 { (rate.ln() - r0.ln()) / (r1.ln() - r0.ln()) } else { 0.0 };
            q0 + s * (q1 - q0)
        })
    })
}

fn adaptive_benefit() -> tvmc::Result<Verdict> {
    let rest = uv_sphere(48, 24);
    let seq = MeshSequence::new(
        (0..3)
            .map(|t| Mesh {
                vertices: rest
                    .vertices
                    .iter()
                    .map(|u| u * (1.0 + 0.05 * (3.0 * u.x + 0.3 * t as f64).sin()))
                    .collect(),
                faces: rest.faces.clone(),
            })
            .collect(),
    )?;
    let curve = |mode| -> tvmc::Result<Vec<(f64, f64)>> {
        RATE_POINTS
            .iter()
            .map(|&rho| {
                let enc = encode_sequence(&seq, &CodecConfig { rho, quant_mode: mode, ..CodecConfig::default() })?;
                Ok((enc.bytes.len() as f64, sequence_d1(&seq, &decode_sequence(&enc.bytes)?)?))
            })
            .collect()
    };
    let adaptive = curve(QuantMode::Adaptive)?;
    let uniform = curve(QuantMode::Uniform)?;
    let mut pass = true;
    let mut compared = 0;
    let mut worst = f64::INFINITY;
    for &(rate, q) in &adaptive {
        // Matched size: the uniform curve evaluated at this rate, allowed only
        // when a measured uniform point lies within the size window.
        let near = uniform.iter().any(|&(r, _)| (r / rate - 1.0).abs() <= MATCHED_SIZE);
        if let (true, Some(qu)) = (near, quality_at(&uniform, rate)) {
            compared += 1;
            worst = worst.min(q - qu);
            pass &= q >= qu;
        }
    }
    Ok(verdict(
        pass && compared > 0,
        format!(
            "{} vertices, {compared} matched-size pairs, min D1 gain of adaptive {worst:+.4} dB",
            rest.vertices.len()
        ),
    ))
}

fn ablation() -> tvmc::Result<Verdict> {
    let seq = sphere_sequence();
    let mut means = Vec::new();
    for pipeline in [AnchorPipeline::Initial, AnchorPipeline::Coarse, AnchorPipeline::Fine] {
        let enc = encode_sequence(&seq, &CodecConfig { pipeline, ..CodecConfig::default() })?;
        let inter: Vec<f64> = enc
            .trace
            .iter()
            .filter(|t| t.kind == FrameKind::Inter)
            .map(|t| t.displacements.mean_magnitude())
            .collect();
        means.push(inter.iter().sum::<f64>() / inter.len() as f64);
    }
    Ok(verdict(
        means[1] <= means[0] && means[2] <= means[1],
        format!(
            "mean inter displacement: alignment {:.5}, +motion {:.5}, +quadric {:.5}",
            means[0], means[1], means[2]
        ),
    ))
}

fn performance() -> tvmc::Result<Verdict> {
    let seq = generate(&GenParams::default())?;
    let start = Instant::now();
    let enc = encode_sequence(&seq, &CodecConfig::default())?;
    let encode = start.elapsed();
    let dec = decode_sequence(&enc.bytes)?;
    let total = start.elapsed();
    Ok(verdict(
        total < PERF_BUDGET && dec.len() == seq.len(),
        format!("encode {encode:.2?}, encode+decode {total:.2?}, {} bytes", enc.bytes.len()),
    ))
}

fn main() {
    let checks: [(u32, &str, Check); 11] = [
        (2, "topology consistency", topology_consistency),
        (3, "closed-loop mirror", closed_loop_mirror),
        (4, "end-to-end distortion bound", distortion_bound),
        (5, "Kalman limits and translation oracle", kalman_limits),
        (6, "QEM optimality", qem_optimality),
        (7, "metric oracles", metric_oracles),
        (8, "entropy round trip and skew", entropy_round_trip),
        (9, "inter-coding benefit", inter_benefit),
        (10, "adaptive quantization benefit", adaptive_benefit),
        (11, "stage-wise ablation", ablation),
        (12, "performance envelope", performance),
    ];
    let mut passed = 0;
    let mut broken = false;
    for (id, name, check) in checks {
        match check() {
            Ok(v) => {
                passed += v.pass as usize;
                println!("criterion {id:>2} {}: {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
            }
            Err(e) => {
                broken = true;
                println!("criterion {id:>2} FAIL: {name}: error: {e}");
            }
        }
    }
    println!("acceptance: {passed}/{} criteria passed", checks.len());
    if broken {
        std::process::exit(1);
    }
}
