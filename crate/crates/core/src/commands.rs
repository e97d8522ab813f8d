//! File-level workflows behind the `tvmc` binary: frame directories in,
//! bitstreams and reports out.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::bitstream::{decode_sequence, encode_sequence, CodecConfig, EncodeReport, FrameReport};
use crate::mesh::MeshFormat;
use crate::metrics::{bd_rate, mesh_quality, rd_csv, FrameQuality, RdCurve, RdPoint, RdRow};
use crate::synth::{generate, GenParams};
use crate::{Error, Mesh, MeshSequence, Result};

/// Everything an `encode` run produced, written next to the bitstream.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config: CodecConfig,
    pub input: PathBuf,
    pub output: PathBuf,
    pub frame_count: usize,
    pub intra_frames: usize,
    pub inter_frames: usize,
    pub frames: Vec<FrameReport>,
    pub header_bytes: usize,
    pub overhead_bytes: usize,
    pub total_bytes: usize,
    pub encode_ms: f64,
}

impl RunManifest {
    fn new(config: &CodecConfig, input: &Path, output: &Path, report: EncodeReport, encode_ms: f64) -> Self {
        let intra = report
            .frames
            .iter()
            .filter(|f| f.kind == crate::bitstream::FrameKind::Intra)
            .count();
        RunManifest {
            config: config.clone(),
            input: input.to_path_buf(),
            output: output.to_path_buf(),
            frame_count: report.frames.len(),
            intra_frames: intra,
            inter_frames: report.frames.len() - intra,
            frames: report.frames,
            header_bytes: report.header_bytes,
            overhead_bytes: report.overhead_bytes,
            total_bytes: report.total_bytes,
            encode_ms,
        }
    }
}

/// Trailing decimal digits of a file stem, e.g. `frame_0012` gives 12.
fn frame_number(path: &Path) -> Option<u64> {
    let stem = path.file_stem()?.to_str()?;
    let digits = stem.len() - stem.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    stem[stem.len() - digits..].parse().ok()
}

/// Mesh files of `dir` ordered by numeric suffix. Suffixes must be
/// consecutive.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut frames = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if MeshFormat::from_path(&path).is_none() {
            continue;
        }
        let n = frame_number(&path).ok_or_else(|| {
            Error::InvalidInput(format!("{}: frame file name has no numeric suffix", path.display()))
        })?;
        frames.push((n, path));
    }
    if frames.is_empty() {
        return Err(Error::InvalidInput(format!("{}: no .obj or .ply frames", dir.display())));
    }
    frames.sort();
    for w in frames.windows(2) {
        if w[1].0 == w[0].0 {
            return Err(Error::InvalidInput(format!(
                "{} and {} share frame number {}",
                w[0].1.display(),
                w[1].1.display(),
                w[0].0
            )));
        }
        if w[1].0 != w[0].0 + 1 {
            return Err(Error::InvalidInput(format!(
                "{}: missing frame {} before {}",
                dir.display(),
                w[0].0 + 1,
                w[1].1.display()
            )));
        }
    }
    Ok(frames.into_iter().map(|(_, p)| p).collect())
}

pub fn read_frames(dir: &Path) -> Result<MeshSequence> {
    let frames = list_frames(dir)?
        .iter()
        .map(Mesh::load_auto)
        .collect::<Result<Vec<_>>>()?;
    MeshSequence::new(frames)
}

/// Writes `frame_0000.obj`, `frame_0001.obj`, ... into `dir`, creating it.
pub fn write_frames(dir: &Path, seq: &MeshSequence) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    seq.frames()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let path = dir.join(format!("frame_{i:04}.obj"));
            m.save(&path, MeshFormat::Obj)?;
            Ok(path)
        })
        .collect()
}

/// Path of the manifest written alongside `bitstream`.
pub fn manifest_path(bitstream: &Path) -> PathBuf {
    bitstream.with_extension("json")
}

/// Encodes the frames of `input` into `output` and writes the manifest next
/// to it.
pub fn encode_dir(input: &Path, config: &CodecConfig, output: &Path) -> Result<RunManifest> {
    let seq = read_frames(input)?;
    let start = Instant::now();
    let encoded = encode_sequence(&seq, config)?;
    let encode_ms = start.elapsed().as_secs_f64() * 1e3;
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(output, &encoded.bytes).map_err(|e| Error::io(output, e))?;
    let manifest = RunManifest::new(config, input, output, encoded.report, encode_ms);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let mpath = manifest_path(output);
    fs::write(&mpath, json).map_err(|e| Error::io(&mpath, e))?;
    Ok(manifest)
}

/// Decodes `input` into per-frame OBJ files under `output`.
pub fn decode_file(input: &Path, output: &Path) -> Result<Vec<PathBuf>> {
    let bytes = fs::read(input).map_err(|e| Error::io(input, e))?;
    let seq = decode_sequence(&bytes)?;
    write_frames(output, &seq)
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub frames: Vec<FrameQuality>,
    pub mean: FrameQuality,
}

impl EvalReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame,d1_db,d2_db\n");
        for (i, q) in self.frames.iter().enumerate() {
            out.push_str(&format!("{i},{:.4},{:.4}\n", q.d1_db, q.d2_db));
        }
        out.push_str(&format!("mean,{:.4},{:.4}\n", self.mean.d1_db, self.mean.d2_db));
        out
    }
}

pub fn eval_sequences(original: &MeshSequence, decoded: &MeshSequence, samples: usize, seed: u64) -> Result<EvalReport> {
    if original.len() != decoded.len() {
        return Err(Error::InvalidInput(format!(
            "frame count mismatch: {} original, {} decoded",
            original.len(),
            decoded.len()
        )));
    }
    let frames = original
        .frames()
        .iter()
        .zip(decoded.frames())
        .map(|(a, b)| mesh_quality(a, b, samples, seed))
        .collect::<Result<Vec<_>>>()?;
    let n = frames.len() as f64;
    let mean = FrameQuality {
        d1_db: frames.iter().map(|q| q.d1_db).sum::<f64>() / n,
        d2_db: frames.iter().map(|q| q.d2_db).sum::<f64>() / n,
    };
    Ok(EvalReport { frames, mean })
}

pub fn eval_dirs(original: &Path, decoded: &Path, samples: usize, seed: u64) -> Result<EvalReport> {
    eval_sequences(&read_frames(original)?, &read_frames(decoded)?, samples, seed)
}

/// Generates a synthetic sequence into `output`.
pub fn gen(params: &GenParams, output: &Path) -> Result<Vec<PathBuf>> {
    write_frames(output, &generate(params)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rates: Vec<f64>,
    pub inter: Vec<RdRow>,
    pub intra: Vec<RdRow>,
    /// BD-rate of inter against intra-only coding on D1 and D2, in percent.
    pub bd_rate_d1: Option<f64>,
    pub bd_rate_d2: Option<f64>,
}

impl SweepReport {
    /// Inter rows followed by intra-only rows, with a `mode` column.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (mode, rows) in [("inter", &self.inter), ("intra", &self.intra)] {
            for (i, line) in rd_csv(rows).lines().enumerate() {
                if i == 0 {
                    if out.is_empty() {
                        out.push_str(&format!("mode,{line}\n"));
                    }
                    continue;
                }
                out.push_str(&format!("{mode},{line}\n"));
            }
        }
        out
    }
}

/// One encode, decode and evaluation of `seq` at `config`.
pub fn rd_point(seq: &MeshSequence, config: &CodecConfig, samples: usize, seed: u64) -> Result<RdRow> {
    let encoded = encode_sequence(seq, config)?;
    let decoded = decode_sequence(&encoded.bytes)?;
    let q = eval_sequences(seq, &decoded, samples, seed)?;
    Ok(RdRow {
        rate_bits: encoded.bytes.len() as u64 * 8,
        frame_count: seq.len(),
        d1_db: q.mean.d1_db,
        d2_db: q.mean.d2_db,
    })
}

/// Sweeps `rates` in inter and intra-only mode, one thread per rate point.
pub fn sweep(seq: &MeshSequence, config: &CodecConfig, rates: &[f64], samples: usize, seed: u64) -> Result<SweepReport> {
    config.validate()?;
    let run = |intra: bool| -> Result<Vec<RdRow>> {
        std::thread::scope(|s| {
            let handles: Vec<_> = rates
                .iter()
                .map(|&rho| {
                    let mut cfg = if intra { config.intra_only() } else { config.clone() };
                    cfg.rho = rho;
                    s.spawn(move || rd_point(seq, &cfg, samples, seed))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        })
    };
    let inter = run(false)?;
    let intra = run(true)?;
    let curve = |rows: &[RdRow], d2: bool| {
        RdCurve::new(
            rows.iter()
                .map(|r| RdPoint {
                    rate: r.rate_bits as f64,
                    quality: if d2 { r.d2_db } else { r.d1_db },
                })
                .collect(),
        )
    };
    let bd = |d2| bd_rate(&curve(&intra, d2), &curve(&inter, d2)).ok();
    Ok(SweepReport {
        rates: rates.to_vec(),
        bd_rate_d1: bd(false),
        bd_rate_d2: bd(true),
        inter,
        intra,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_numbers() {
        assert_eq!(frame_number(Path::new("a/frame_0012.obj")), Some(12));
        assert_eq!(frame_number(Path::new("7.ply")), Some(7));
        assert_eq!(frame_number(Path::new("frame.obj")), None);
    }
}
