use crate::motion::KalmanParams;
use crate::subdivision::QuantMode;
use crate::{Error, Result};

/// Displacement scales of the five rate points R1..R5, in quantization steps
/// per unit of the sequence's largest bounding-box side.
pub const RATE_POINTS: [f64; 5] = [64.0, 128.0, 256.0, 512.0, 1024.0];

/// How far the inter-frame anchor pipeline runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorPipeline {
    /// Nearest-vertex alignment only.
    Initial,
    /// Alignment with Kalman motion compensation.
    Coarse,
    /// Motion compensation followed by quadric refinement.
    Fine,
}

impl AnchorPipeline {
    pub(crate) fn to_u8(self) -> u8 {
        match self {
            AnchorPipeline::Initial => 0,
            AnchorPipeline::Coarse => 1,
            AnchorPipeline::Fine => 2,
        }
    }

    pub(crate) fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            0 => AnchorPipeline::Initial,
            1 => AnchorPipeline::Coarse,
            2 => AnchorPipeline::Fine,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CodecConfig {
    pub gof_size: usize,
    pub levels: usize,
    /// Normalized displacement scale, see [`RATE_POINTS`].
    pub rho: f64,
    pub delta: f64,
    pub hbar: u32,
    pub kalman: KalmanParams,
    pub motion_bits: u32,
    pub position_bits: u32,
    pub injective: bool,
    pub quant_mode: QuantMode,
    /// Base mesh size of intra frames; derived from the frame size when unset.
    pub base_vertices: Option<usize>,
    pub pipeline: AnchorPipeline,
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig {
            gof_size: 8,
            levels: 2,
            rho: RATE_POINTS[2],
            delta: 0.0,
            hbar: 6,
            kalman: KalmanParams::LOW_MOTION,
            motion_bits: 16,
            position_bits: 18,
            injective: false,
            quant_mode: QuantMode::Adaptive,
            base_vertices: None,
            pipeline: AnchorPipeline::Fine,
        }
    }
}

impl CodecConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.gof_size < 1 {
            return bad("gof_size must be at least 1".into());
        }
        if self.levels > 6 {
            return bad(format!("levels {} exceeds the maximum of 6", self.levels));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("rho must be positive and finite, got {}", self.rho));
        }
        if !self.delta.is_finite() {
            return bad("delta must be finite".into());
        }
        if self.hbar < 1 {
            return bad("hbar must be at least 1".into());
        }
        let k = &self.kalman;
        if !(k.sigma_pro > 0.0 && k.sigma_sys > 0.0 && k.p0 >= 0.0) {
            return bad("kalman noise terms must be positive".into());
        }
        if !(1..=30).contains(&self.motion_bits) {
            return bad(format!("motion_bits {} outside 1..=30", self.motion_bits));
        }
        if !(1..=30).contains(&self.position_bits) {
            return bad(format!("position_bits {} outside 1..=30", self.position_bits));
        }
        if matches!(self.base_vertices, Some(n) if n < 4) {
            return bad("base_vertices must be at least 4".into());
        }
        Ok(())
    }

    /// Intra-only variant of this configuration (every frame its own GOF).
    pub fn intra_only(&self) -> Self {
        CodecConfig {
            gof_size: 1,
            ..self.clone()
        }
    }

    pub fn base_target(&self, frame_vertices: usize) -> usize {
        self.base_vertices.unwrap_or_else(|| {
            let n = frame_vertices as f64 / 4f64.powi(self.levels as i32);
            (n.round() as usize).max(4)
        })
    }

    /// Applies one `key = value` setting using the field names of this struct.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("{key}: cannot parse `{value}`")))
        }
        fn flag(key: &str, value: &str) -> Result<bool> {
            match value {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(Error::Config(format!("{key}: expected a boolean, got `{value}`"))),
            }
        }
        match key {
            "gof_size" => self.gof_size = num(key, value)?,
            "levels" => self.levels = num(key, value)?,
            "rho" => self.rho = num(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "hbar" => self.hbar = num(key, value)?,
            "alpha" => self.kalman.sigma_pro = num(key, value)?,
            "beta" => self.kalman.sigma_sys = num(key, value)?,
            "gamma" => self.kalman.p0 = num(key, value)?,
            "alpha_preset" => {
                self.kalman = match value {
                    "low" => KalmanParams::LOW_MOTION,
                    "high" => KalmanParams::HIGH_MOTION,
                    _ => return Err(Error::Config(format!("alpha_preset: expected low|high, got `{value}`"))),
                }
            }
            "motion_bits" => self.motion_bits = num(key, value)?,
            "position_bits" => self.position_bits = num(key, value)?,
            "injective" => self.injective = flag(key, value)?,
            "uniform_quant" => {
                self.quant_mode = if flag(key, value)? {
                    QuantMode::Uniform
                } else {
                    QuantMode::Adaptive
                }
            }
            "quant_mode" => {
                self.quant_mode = match value {
                    "adaptive" => QuantMode::Adaptive,
                    "uniform" => QuantMode::Uniform,
                    _ => return Err(Error::Config(format!("quant_mode: expected adaptive|uniform, got `{value}`"))),
                }
            }
            "base_vertices" => self.base_vertices = Some(num(key, value)?),
            "pipeline" => {
                self.pipeline = match value {
                    "initial" => AnchorPipeline::Initial,
                    "coarse" => AnchorPipeline::Coarse,
                    "fine" => AnchorPipeline::Fine,
                    _ => return Err(Error::Config(format!("pipeline: expected initial|coarse|fine, got `{value}`"))),
                }
            }
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Parses flat `key = value` lines on top of the defaults. `#` starts a
    /// comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = CodecConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
