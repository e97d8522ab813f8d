//! Sequence encoder and decoder.
//!
//! Section order: one header, then per GOF a base mesh section and the intra
//! displacement section, then a motion and a displacement section per inter
//! frame. The encoder replays everything the decoder does on decoded values,
//! so both sides hold identical anchors and subdivided meshes.
//!
//! A displacement section starts with a mode byte: the field is either coded
//! on its own or as the difference to the previous frame's quantized field of
//! the same GOF, whichever is shorter. Within a GOF the subdivided vertices
//! correspond one to one, so the difference is well defined.

use std::time::Instant;

use serde::Serialize;

use super::config::{AnchorPipeline, CodecConfig};
use super::container::{
    read_container, ContainerWriter, PayloadReader, Section, SectionKind, FILE_OVERHEAD,
    SECTION_OVERHEAD,
};
use crate::align::{align_with, target_octree, AnchorMesh};
use crate::entropy::{
    decode_displacement_field, decode_motion_field, encode_displacement_field, encode_motion_ints,
    write_varint, BitReader, BitWriter, MotionGrid,
};
use crate::mesh::Aabb;
use crate::motion::{generate_coarse_anchor_with, KalmanParams, KalmanState, MotionField};
use crate::qem::{refine_anchor_with, simplify, vertex_quadrics};
use crate::spatial::SurfaceIndex;
use crate::subdivision::{
    compute_displacements, dequantize, quantize, DisplacementField, QuantMode, QuantParams,
    QuantizedField, SubdivisionPlan,
};
use crate::{AdjacencyMap, Error, Mesh, MeshSequence, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameKind {
    Intra,
    Inter,
}

/// Wall-clock time per encoder stage, in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub simplify_ms: f64,
    pub align_ms: f64,
    pub motion_ms: f64,
    pub refine_ms: f64,
    pub displacement_ms: f64,
    pub coding_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameReport {
    pub frame: usize,
    pub gof: usize,
    pub kind: FrameKind,
    pub base_bytes: usize,
    pub motion_bytes: usize,
    pub displacement_bytes: usize,
    pub timings: StageTimings,
}

impl FrameReport {
    pub fn payload_bytes(&self) -> usize {
        self.base_bytes + self.motion_bytes + self.displacement_bytes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncodeReport {
    pub frames: Vec<FrameReport>,
    pub header_bytes: usize,
    /// Magic, version, section framing and checksums.
    pub overhead_bytes: usize,
    pub total_bytes: usize,
}

/// Encoder-side state of one frame, for inspection and testing.
#[derive(Debug, Clone)]
pub struct FrameTrace {
    pub kind: FrameKind,
    /// Decoded anchor positions on the GOF base connectivity. For intra
    /// frames this is the decoded base mesh.
    pub anchor: Vec<Vec3>,
    /// Base connectivity of the GOF, shared by all its anchors.
    pub base_faces: Vec<[usize; 3]>,
    /// Anchor before motion quantization (inter frames only).
    pub unquantized_anchor: Option<Vec<Vec3>>,
    /// Subdivided decoded anchor.
    pub subdivided: Mesh,
    /// Displacements before quantization.
    pub displacements: DisplacementField,
    /// Per-vertex quantization scale `rho * weight` of the displacements.
    pub scales: Vec<f64>,
    /// Encoder reconstruction; the decoder reproduces it exactly.
    pub reconstruction: Mesh,
}

#[derive(Debug, Clone)]
pub struct EncodedSequence {
    pub bytes: Vec<u8>,
    pub report: EncodeReport,
    pub trace: Vec<FrameTrace>,
}

#[derive(Debug, Clone)]
pub struct DecodedSequence {
    pub frames: MeshSequence,
    /// Decoded anchor (base mesh for intra frames) of every frame.
    pub anchors: Vec<Vec<Vec3>>,
    pub config: CodecConfig,
}

/// Derived quantities shared by encoder and decoder.
#[derive(Debug, Clone, Copy)]
struct Header {
    frame_count: usize,
    bbox: Aabb,
}

impl Header {
    fn extent(&self) -> f64 {
        let e = self.bbox.max_extent();
        if e > 0.0 {
            e
        } else {
            1.0
        }
    }

    fn quant(&self, cfg: &CodecConfig) -> QuantParams {
        QuantParams {
            rho: cfg.rho / self.extent(),
            delta: cfg.delta,
            hbar: cfg.hbar,
            mode: cfg.quant_mode,
        }
    }

    fn position_step(&self, cfg: &CodecConfig) -> f64 {
        self.extent() / ((1u64 << cfg.position_bits) - 1) as f64
    }
}

fn write_header(cfg: &CodecConfig, h: &Header) -> Vec<u8> {
    let mut out = Vec::new();
    write_varint(&mut out, cfg.gof_size as u64);
    write_varint(&mut out, cfg.levels as u64);
    for x in [cfg.rho, cfg.delta] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    write_varint(&mut out, cfg.hbar as u64);
    for x in [cfg.kalman.sigma_pro, cfg.kalman.sigma_sys, cfg.kalman.p0] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out.push(cfg.motion_bits as u8);
    out.push(cfg.position_bits as u8);
    out.push(cfg.injective as u8);
    out.push(match cfg.quant_mode {
        QuantMode::Adaptive => 0,
        QuantMode::Uniform => 1,
    });
    out.push(cfg.pipeline.to_u8());
    write_varint(&mut out, cfg.base_vertices.map_or(0, |n| n as u64));
    write_varint(&mut out, h.frame_count as u64);
    for x in h.bbox.min.iter().chain(h.bbox.max.iter()) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

fn read_header(payload: &[u8]) -> Result<(CodecConfig, Header)> {
    let mut r = PayloadReader::new(payload);
    let gof_size = r.varint()? as usize;
    let levels = r.varint()? as usize;
    let rho = r.f64()?;
    let delta = r.f64()?;
    let hbar = u32::try_from(r.varint()?).map_err(|_| Error::Malformed("hbar".into()))?;
    let kalman = KalmanParams {
        sigma_pro: r.f64()?,
        sigma_sys: r.f64()?,
        p0: r.f64()?,
    };
    let motion_bits = r.u8()? as u32;
    let position_bits = r.u8()? as u32;
    let injective = r.u8()? != 0;
    let quant_mode = match r.u8()? {
        0 => QuantMode::Adaptive,
        1 => QuantMode::Uniform,
        v => return Err(Error::Malformed(format!("quantization mode {v}"))),
    };
    let pipeline = AnchorPipeline::from_u8(r.u8()?)
        .ok_or_else(|| Error::Malformed("anchor pipeline".into()))?;
    let base_vertices = match r.varint()? {
        0 => None,
        n => Some(n as usize),
    };
    let frame_count = r.varint()? as usize;
    let mut c = [0.0; 6];
    for x in &mut c {
        *x = r.f64()?;
    }
    if !r.rest().is_empty() {
        return Err(Error::Malformed("trailing bytes in header".into()));
    }
    let cfg = CodecConfig {
        gof_size,
        levels,
        rho,
        delta,
        hbar,
        kalman,
        motion_bits,
        position_bits,
        injective,
        quant_mode,
        base_vertices,
        pipeline,
    };
    cfg.validate()
        .map_err(|e| Error::Malformed(format!("header config: {e}")))?;
    if frame_count == 0 {
        return Err(Error::Malformed("header declares zero frames".into()));
    }
    let bbox = Aabb {
        min: Vec3::new(c[0], c[1], c[2]),
        max: Vec3::new(c[3], c[4], c[5]),
    };
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::Malformed("non-finite bounding box".into()));
    }
    Ok((cfg, Header { frame_count, bbox }))
}

/// Base section: `[motion extent f64][varint V][varint F][packed positions]
/// [varint index triples]`.
fn write_base(base: &Mesh, motion_extent: f64, cfg: &CodecConfig, h: &Header) -> (Vec<u8>, Mesh) {
    let step = h.position_step(cfg);
    let max = (1u64 << cfg.position_bits) - 1;
    let mut out = motion_extent.to_le_bytes().to_vec();
    write_varint(&mut out, base.vertices.len() as u64);
    write_varint(&mut out, base.faces.len() as u64);
    let mut bits = BitWriter::new();
    let mut decoded = Vec::with_capacity(base.vertices.len());
    for v in &base.vertices {
        let mut d = Vec3::zeros();
        for k in 0..3 {
            let q = ((v[k] - h.bbox.min[k]) / step).round().clamp(0.0, max as f64) as u64;
            bits.write_bits(q, cfg.position_bits);
            d[k] = h.bbox.min[k] + q as f64 * step;
        }
        decoded.push(d);
    }
    out.extend(bits.into_bytes());
    for f in &base.faces {
        for &i in f {
            write_varint(&mut out, i as u64);
        }
    }
    let mesh = Mesh {
        vertices: decoded,
        faces: base.faces.clone(),
    };
    (out, mesh)
}

fn read_base(payload: &[u8], cfg: &CodecConfig, h: &Header) -> Result<(Mesh, f64)> {
    let mut r = PayloadReader::new(payload);
    let motion_extent = r.f64()?;
    if !motion_extent.is_finite() {
        return Err(Error::Malformed("non-finite motion extent".into()));
    }
    let nv = r.varint()? as usize;
    let nf = r.varint()? as usize;
    let packed_len = nv
        .checked_mul(3 * cfg.position_bits as usize)
        .ok_or_else(|| Error::Malformed("base vertex count".into()))?
        .div_ceil(8);
    let mut bits = BitReader::new(r.take(packed_len)?);
    let step = h.position_step(cfg);
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut v = Vec3::zeros();
        for k in 0..3 {
            v[k] = h.bbox.min[k] + bits.read_bits(cfg.position_bits)? as f64 * step;
        }
        vertices.push(v);
    }
    let mut faces = Vec::with_capacity(nf.min(payload.len()));
    for _ in 0..nf {
        let mut f = [0usize; 3];
        for i in &mut f {
            *i = r.varint()? as usize;
        }
        faces.push(f);
    }
    if !r.rest().is_empty() {
        return Err(Error::Malformed("trailing bytes in base mesh section".into()));
    }
    Ok((Mesh::new(vertices, faces)?, motion_extent))
}

fn gof_ranges(frames: usize, gof: usize) -> impl Iterator<Item = std::ops::Range<usize>> {
    (0..frames)
        .step_by(gof)
        .map(move |s| s..(s + gof).min(frames))
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Per-GOF state the encoder and decoder both rebuild.
struct GofContext {
    faces: Vec<[usize; 3]>,
    plan: SubdivisionPlan,
    valences: Vec<usize>,
    grid: MotionGrid,
}

impl GofContext {
    fn new(base: &Mesh, motion_extent: f64, cfg: &CodecConfig) -> Self {
        let plan = SubdivisionPlan::new(base, cfg.levels);
        GofContext {
            faces: base.faces.clone(),
            valences: plan.valences(),
            plan,
            grid: MotionGrid::new(motion_extent, cfg.motion_bits),
        }
    }

    fn scales(&self, q: &QuantParams) -> Vec<f64> {
        (0..self.plan.vertex_count())
            .map(|v| q.rho * crate::subdivision::neighbor_weight(&self.plan.adjacency, v, q))
            .collect()
    }
}

/// Encodes `seq` frame by frame in groups of `cfg.gof_size`.
pub fn encode_sequence(seq: &MeshSequence, cfg: &CodecConfig) -> Result<EncodedSequence> {
    cfg.validate()?;
    for (i, f) in seq.frames().iter().enumerate() {
        if f.faces.is_empty() {
            return Err(Error::InvalidInput(format!("frame {i} has no faces")));
        }
    }
    let header = Header {
        frame_count: seq.len(),
        bbox: seq.bbox(),
    };
    let qp = header.quant(cfg);
    let mut writer = ContainerWriter::new();
    let header_payload = write_header(cfg, &header);
    writer.push(SectionKind::Header, &header_payload);
    let mut sections = 1;
    let mut reports = Vec::with_capacity(seq.len());
    let mut trace = Vec::with_capacity(seq.len());

    for (g, range) in gof_ranges(seq.len(), cfg.gof_size).enumerate() {
        let first = &seq.frames()[range.start];
        let mut timings = StageTimings::default();

        let t = Instant::now();
        let base = simplify(first, cfg.base_target(first.vertices.len()))?;
        timings.simplify_ms = ms(t);
        let motion_extent = first.bbox().max_extent();
        let t = Instant::now();
        let (base_payload, decoded_base) = write_base(&base, motion_extent, cfg, &header);
        timings.coding_ms += ms(t);
        let ctx = GofContext::new(&decoded_base, motion_extent, cfg);
        let scales = ctx.scales(&qp);

        let (disp_payload, mut prev_q, frame_trace) =
            code_displacements(&ctx, &qp, &scales, decoded_base.vertices.clone(), first, None, &mut timings)?;
        writer.push(SectionKind::BaseMesh, &base_payload);
        writer.push(SectionKind::Displacement, &disp_payload);
        sections += 2;
        reports.push(FrameReport {
            frame: range.start,
            gof: g,
            kind: FrameKind::Intra,
            base_bytes: base_payload.len(),
            motion_bytes: 0,
            displacement_bytes: disp_payload.len(),
            timings,
        });
        trace.push(FrameTrace {
            kind: FrameKind::Intra,
            unquantized_anchor: None,
            ..frame_trace
        });

        let mut reference = decoded_base;
        let mut state = KalmanState::new(cfg.kalman);
        for t_idx in range.start + 1..range.end {
            let target = &seq.frames()[t_idx];
            let mut timings = StageTimings::default();
            let (anchor, next_state) = build_anchor(&reference, target, &state, cfg, &mut timings)?;
            state = next_state;

            let t = Instant::now();
            let motions = MotionField(
                anchor
                    .positions
                    .iter()
                    .zip(&reference.vertices)
                    .map(|(a, r)| a - r)
                    .collect(),
            );
            let q = ctx.grid.quantize(&motions)?;
            let motion_payload = encode_motion_ints(&q);
            let decoded = apply_motion(&reference, &ctx.grid.dequantize(&q));
            timings.coding_ms += ms(t);

            let (disp_payload, q_disp, frame_trace) =
                code_displacements(&ctx, &qp, &scales, decoded.clone(), target, Some(&prev_q), &mut timings)?;
            prev_q = q_disp;
            writer.push(SectionKind::Motion, &motion_payload);
            writer.push(SectionKind::Displacement, &disp_payload);
            sections += 2;
            reports.push(FrameReport {
                frame: t_idx,
                gof: g,
                kind: FrameKind::Inter,
                base_bytes: 0,
                motion_bytes: motion_payload.len(),
                displacement_bytes: disp_payload.len(),
                timings,
            });
            trace.push(FrameTrace {
                kind: FrameKind::Inter,
                unquantized_anchor: Some(anchor.positions),
                ..frame_trace
            });
            reference = Mesh {
                vertices: decoded,
                faces: ctx.faces.clone(),
            };
        }
    }

    let bytes = writer.finish();
    let report = EncodeReport {
        header_bytes: header_payload.len(),
        overhead_bytes: FILE_OVERHEAD + sections * SECTION_OVERHEAD,
        total_bytes: bytes.len(),
        frames: reports,
    };
    Ok(EncodedSequence {
        bytes,
        report,
        trace,
    })
}

/// Runs the configured anchor stages of one inter frame.
fn build_anchor(
    reference: &Mesh,
    target: &Mesh,
    state: &KalmanState,
    cfg: &CodecConfig,
    timings: &mut StageTimings,
) -> Result<(AnchorMesh, KalmanState)> {
    let t = Instant::now();
    let octree = target_octree(target)?;
    timings.align_ms = ms(t);
    if cfg.pipeline == AnchorPipeline::Initial {
        let t = Instant::now();
        let anchor = align_with(reference, &octree, cfg.injective);
        timings.align_ms += ms(t);
        return Ok((anchor, state.clone()));
    }
    let t = Instant::now();
    let ref_adj = AdjacencyMap::build(reference);
    let coarse = generate_coarse_anchor_with(reference, &ref_adj, &octree, state, cfg.injective);
    timings.motion_ms = ms(t);
    if cfg.pipeline == AnchorPipeline::Coarse {
        return Ok((coarse.anchor, coarse.state));
    }
    let t = Instant::now();
    let target_adj = AdjacencyMap::build(target);
    let quadrics = vertex_quadrics(target);
    let fine = refine_anchor_with(&coarse.anchor, target, &target_adj, &quadrics);
    timings.refine_ms = ms(t);
    Ok((fine, coarse.state))
}

fn apply_motion(reference: &Mesh, m: &MotionField) -> Vec<Vec3> {
    reference
        .vertices
        .iter()
        .zip(&m.0)
        .map(|(r, d)| r + d)
        .collect()
}

fn code_displacements(
    ctx: &GofContext,
    qp: &QuantParams,
    scales: &[f64],
    anchor: Vec<Vec3>,
    target: &Mesh,
    prev: Option<&QuantizedField>,
    timings: &mut StageTimings,
) -> Result<(Vec<u8>, QuantizedField, FrameTrace)> {
    let t = Instant::now();
    let subdivided = ctx.plan.apply(&anchor);
    let surf = SurfaceIndex::build(target)?;
    let displacements = compute_displacements(&subdivided, &surf);
    timings.displacement_ms = ms(t);
    let t = Instant::now();
    let q = quantize(&displacements, &ctx.plan.adjacency, qp)?;
    let payload = encode_displacement_payload(&q, prev, &ctx.valences)?;
    let reconstruction = dequantize(&q, &ctx.plan.adjacency, qp).apply(&subdivided);
    timings.coding_ms += ms(t);
    Ok((
        payload,
        q,
        FrameTrace {
            kind: FrameKind::Intra,
            anchor,
            base_faces: ctx.faces.clone(),
            unquantized_anchor: None,
            subdivided,
            displacements,
            scales: scales.to_vec(),
            reconstruction,
        },
    ))
}

pub fn decode_sequence(bytes: &[u8]) -> Result<MeshSequence> {
    Ok(decode_sequence_detailed(bytes)?.frames)
}

/// Decodes and also returns the per-frame anchors and the stream's config.
pub fn decode_sequence_detailed(bytes: &[u8]) -> Result<DecodedSequence> {
    let sections = read_container(bytes)?;
    let mut it = sections.into_iter();
    let header = expect(&mut it, SectionKind::Header)?;
    let (cfg, header) = read_header(header.payload)?;
    let qp = header.quant(&cfg);
    let mut frames = Vec::with_capacity(header.frame_count);
    let mut anchors = Vec::with_capacity(header.frame_count);
    for range in gof_ranges(header.frame_count, cfg.gof_size) {
        let (base, motion_extent) = read_base(expect(&mut it, SectionKind::BaseMesh)?.payload, &cfg, &header)?;
        let ctx = GofContext::new(&base, motion_extent, &cfg);
        let disp = expect(&mut it, SectionKind::Displacement)?;
        let mut prev_q = None;
        frames.push(reconstruct(&ctx, &qp, &base.vertices, disp.payload, &mut prev_q)?);
        let mut reference = base.vertices;
        anchors.push(reference.clone());
        for _ in range.start + 1..range.end {
            let motion = expect(&mut it, SectionKind::Motion)?;
            let m = decode_motion_field(motion.payload, &ctx.grid)?;
            if m.len() != reference.len() {
                return Err(Error::Malformed(format!(
                    "motion field has {} vectors, base mesh has {} vertices",
                    m.len(),
                    reference.len()
                )));
            }
            let reference_mesh = Mesh {
                vertices: reference,
                faces: Vec::new(),
            };
            reference = apply_motion(&reference_mesh, &m);
            let disp = expect(&mut it, SectionKind::Displacement)?;
            frames.push(reconstruct(&ctx, &qp, &reference, disp.payload, &mut prev_q)?);
            anchors.push(reference.clone());
        }
    }
    if it.next().is_some() {
        return Err(Error::Malformed("unexpected trailing sections".into()));
    }
    Ok(DecodedSequence {
        frames: MeshSequence::new(frames)?,
        anchors,
        config: cfg,
    })
}

fn expect<'a>(it: &mut impl Iterator<Item = Section<'a>>, kind: SectionKind) -> Result<Section<'a>> {
    match it.next() {
        Some(s) if s.kind == kind => Ok(s),
        Some(s) => Err(Error::Malformed(format!("expected {kind:?} section, found {:?}", s.kind))),
        None => Err(Error::Truncated("missing section")),
    }
}

const DISP_INTRA: u8 = 0;
const DISP_DELTA: u8 = 1;

fn field_delta(q: &QuantizedField, prev: &QuantizedField, sign: i32) -> QuantizedField {
    QuantizedField(
        q.0.iter()
            .zip(&prev.0)
            .map(|(a, b)| std::array::from_fn(|k| a[k].wrapping_add(sign.wrapping_mul(b[k]))))
            .collect(),
    )
}

fn encode_displacement_payload(
    q: &QuantizedField,
    prev: Option<&QuantizedField>,
    valences: &[usize],
) -> Result<Vec<u8>> {
    let mut best = vec![DISP_INTRA];
    best.extend(encode_displacement_field(q, valences)?);
    if let Some(prev) = prev {
        let mut delta = vec![DISP_DELTA];
        delta.extend(encode_displacement_field(&field_delta(q, prev, -1), valences)?);
        if delta.len() < best.len() {
            best = delta;
        }
    }
    Ok(best)
}

fn decode_displacement_payload(
    payload: &[u8],
    prev: Option<&QuantizedField>,
    valences: &[usize],
) -> Result<QuantizedField> {
    let (&mode, rest) = payload
        .split_first()
        .ok_or(Error::Truncated("empty displacement section"))?;
    let q = decode_displacement_field(rest, valences)?;
    match (mode, prev) {
        (DISP_INTRA, _) => Ok(q),
        (DISP_DELTA, Some(prev)) => Ok(field_delta(&q, prev, 1)),
        (DISP_DELTA, None) => Err(Error::Malformed("predicted displacements in an intra frame".into())),
        _ => Err(Error::Malformed(format!("unknown displacement mode {mode}"))),
    }
}

fn reconstruct(
    ctx: &GofContext,
    qp: &QuantParams,
    anchor: &[Vec3],
    payload: &[u8],
    prev: &mut Option<QuantizedField>,
) -> Result<Mesh> {
    let subdivided = ctx.plan.apply(anchor);
    let q = decode_displacement_payload(payload, prev.as_ref(), &ctx.valences)?;
    let mesh = dequantize(&q, &ctx.plan.adjacency, qp).apply(&subdivided);
    *prev = Some(q);
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, GenParams, SyntheticKind};

    fn sphere(frames: usize, reindex: bool) -> MeshSequence {
        generate(&GenParams {
            kind: SyntheticKind::DeformingSphere,
            frames,
            vertices: 162,
            reindex,
            seed: 3,
        })
        .unwrap()
    }

    #[test]
    fn round_trip_matches_encoder_reconstruction() {
        let seq = sphere(5, true);
        let cfg = CodecConfig {
            gof_size: 3,
            ..CodecConfig::default()
        };
        let enc = encode_sequence(&seq, &cfg).unwrap();
        let dec = decode_sequence_detailed(&enc.bytes).unwrap();
        assert_eq!(dec.config, cfg);
        assert_eq!(dec.frames.len(), 5);
        for (i, (frame, tr)) in dec.frames.frames().iter().zip(&enc.trace).enumerate() {
            assert_eq!(frame, &tr.reconstruction, "frame {i}");
            assert_eq!(dec.anchors[i], tr.anchor, "frame {i}");
        }
        let kinds: Vec<_> = enc.report.frames.iter().map(|f| f.kind).collect();
        use FrameKind::*;
        assert_eq!(kinds, [Intra, Inter, Inter, Intra, Inter]);
    }

    #[test]
    fn byte_accounting_reconciles() {
        let enc = encode_sequence(&sphere(4, false), &CodecConfig::default()).unwrap();
        let r = &enc.report;
        let payload: usize = r.frames.iter().map(FrameReport::payload_bytes).sum();
        assert_eq!(payload + r.header_bytes + r.overhead_bytes, enc.bytes.len());
        assert_eq!(r.total_bytes, enc.bytes.len());
    }

    #[test]
    fn corrupted_stream_is_rejected() {
        let enc = encode_sequence(&sphere(2, false), &CodecConfig::default()).unwrap();
        for i in (0..enc.bytes.len()).step_by(7) {
            let mut bad = enc.bytes.clone();
            bad[i] ^= 0x10;
            assert!(decode_sequence(&bad).is_err(), "byte {i}");
        }
        assert!(decode_sequence(&enc.bytes[..enc.bytes.len() / 2]).is_err());
    }

    #[test]
    fn single_frame_is_pure_intra() {
        let seq = sphere(1, false);
        let enc = encode_sequence(&seq, &CodecConfig::default()).unwrap();
        assert_eq!(enc.report.frames.len(), 1);
        assert_eq!(enc.report.frames[0].motion_bytes, 0);
        assert_eq!(decode_sequence(&enc.bytes).unwrap().frames()[0], enc.trace[0].reconstruction);
    }

    #[test]
    fn repeated_displacements_are_predicted() {
        let q = QuantizedField((0..500).map(|i| [i % 7 - 3, i % 3, -(i % 5)]).collect());
        let valences = vec![6; 500];
        let intra = encode_displacement_payload(&q, None, &valences).unwrap();
        let predicted = encode_displacement_payload(&q, Some(&q), &valences).unwrap();
        assert_eq!(intra[0], DISP_INTRA);
        assert_eq!(predicted[0], DISP_DELTA);
        assert!(predicted.len() < intra.len() / 10);
        assert_eq!(decode_displacement_payload(&predicted, Some(&q), &valences).unwrap(), q);
        assert!(decode_displacement_payload(&predicted, None, &valences).is_err());
        assert!(decode_displacement_payload(&[7, 0], None, &valences).is_err());
    }
}
