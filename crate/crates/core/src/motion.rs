//! Coarse anchor generation by Kalman-fused motion compensation.
//!
//! Vertices of the reference base mesh are visited in ascending index order.
//! Each one fuses a temporal prediction (its own true motion from the previous
//! frame pair) with a spatial measurement (the mean true motion of already
//! corrected 1-ring neighbours), moves by the fused estimate, and snaps to the
//! nearest target vertex. The snapped offset becomes that vertex's true motion
//! and feeds the measurements of later neighbours.
//!
//! Gain and covariance are scalars shared by all vertices: the gain is derived
//! once per frame before the loop and the covariance is updated once after it.

use crate::align::{AnchorMesh, AnchorStage};
use crate::spatial::VertexOctree;
use crate::{AdjacencyMap, Mesh, Vec3};

/// Per-vertex motion vectors over the base connectivity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MotionField(pub Vec<Vec3>);

impl MotionField {
    pub fn zeros(n: usize) -> Self {
        MotionField(vec![Vec3::zeros(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Noise configuration of the filter.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct KalmanParams {
    /// Process noise `alpha`.
    pub sigma_pro: f64,
    /// System (measurement) noise `beta`.
    pub sigma_sys: f64,
    /// Initial posterior covariance `gamma`.
    pub p0: f64,
}

impl KalmanParams {
    /// For sequences with little inter-frame motion.
    pub const LOW_MOTION: KalmanParams = KalmanParams {
        sigma_pro: 1e-3,
        sigma_sys: 1e-4,
        p0: 1e-2,
    };

    /// For sequences with pronounced inter-frame motion.
    pub const HIGH_MOTION: KalmanParams = KalmanParams {
        sigma_pro: 1e-2,
        sigma_sys: 1e-4,
        p0: 1e-2,
    };
}

impl Default for KalmanParams {
    fn default() -> Self {
        KalmanParams::LOW_MOTION
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    /// Posterior error covariance.
    pub p: f64,
    pub sigma_pro: f64,
    pub sigma_sys: f64,
    /// True motions of the previous frame pair; `None` on the first inter frame.
    pub prev_true_motion: Option<MotionField>,
}

impl KalmanState {
    /// Fresh state at the start of a group of frames.
    pub fn new(params: KalmanParams) -> Self {
        KalmanState {
            p: params.p0,
            sigma_pro: params.sigma_pro,
            sigma_sys: params.sigma_sys,
            prev_true_motion: None,
        }
    }
}

pub fn predict_motion(state: &KalmanState, vertex: usize) -> Option<Vec3> {
    state
        .prev_true_motion
        .as_ref()
        .and_then(|m| m.0.get(vertex).copied())
}

/// Mean corrected motion over the already corrected part of the 1-ring.
pub fn measure_motion(
    adj: &AdjacencyMap,
    corrected: &[Option<Vec3>],
    vertex: usize,
) -> Option<Vec3> {
    let mut sum = Vec3::zeros();
    let mut n = 0usize;
    for &j in adj.neighbors(vertex) {
        if let Some(m) = corrected[j] {
            sum += m;
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Returns `(gain, p_hat)` with `p_hat = P + sigma_pro` and
/// `gain = p_hat / (p_hat + sigma_sys)`.
pub fn kalman_gain(state: &KalmanState) -> (f64, f64) {
    let p_hat = state.p + state.sigma_pro;
    let denom = p_hat + state.sigma_sys;
    let gain = if denom > 0.0 { p_hat / denom } else { 0.0 };
    (gain, p_hat)
}

pub fn fuse(pred: Option<Vec3>, meas: Option<Vec3>, gain: f64) -> Vec3 {
    match (pred, meas) {
        (Some(p), Some(m)) => p + (m - p) * gain,
        (Some(p), None) => p,
        (None, Some(m)) => m,
        (None, None) => Vec3::zeros(),
    }
}

/// Posterior covariance `(1 - gain) * p_hat`; other fields are kept.
pub fn update_covariance(state: &KalmanState, gain: f64, p_hat: f64) -> KalmanState {
    KalmanState {
        p: (1.0 - gain) * p_hat,
        ..state.clone()
    }
}

#[derive(Debug, Clone)]
pub struct CoarseAnchor {
    pub anchor: AnchorMesh,
    pub true_motions: MotionField,
    pub state: KalmanState,
}

/// Builds the coarse anchor of `reference` against the target vertices held
/// by `octree`.
pub fn generate_coarse_anchor(
    reference: &Mesh,
    octree: &VertexOctree,
    state: &KalmanState,
) -> CoarseAnchor {
    let adj = AdjacencyMap::build(reference);
    generate_coarse_anchor_with(reference, &adj, octree, state, false)
}

/// With `injective`, each vertex snaps to the nearest target vertex not yet
/// claimed by a lower index, falling back to the plain nearest one once the
/// target is exhausted.
pub fn generate_coarse_anchor_with(
    reference: &Mesh,
    adj: &AdjacencyMap,
    octree: &VertexOctree,
    state: &KalmanState,
    injective: bool,
) -> CoarseAnchor {
    let n = reference.vertices.len();
    let mut used = vec![false; if injective { octree.len() } else { 0 }];
    let (gain, p_hat) = kalman_gain(state);
    let mut corrected: Vec<Option<Vec3>> = vec![None; n];
    let mut positions = Vec::with_capacity(n);
    let mut source = Vec::with_capacity(n);
    for i in 0..n {
        let pred = predict_motion(state, i);
        let meas = measure_motion(adj, &corrected, i);
        let estimate = fuse(pred, meas, gain);
        let base = reference.vertices[i];
        let q = base + estimate;
        let hit = if injective {
            let hit = octree
                .nearest_where(&q, |j| !used[j])
                .map_or_else(|| octree.nearest(&q).0, |(j, _)| j);
            used[hit] = true;
            hit
        } else {
            octree.nearest(&q).0
        };
        let snapped = octree.points()[hit];
        corrected[i] = Some(snapped - base);
        positions.push(snapped);
        source.push(hit);
    }
    let true_motions = MotionField(corrected.into_iter().map(|m| m.unwrap()).collect());
    let mut next = update_covariance(state, gain, p_hat);
    next.prev_true_motion = Some(true_motions.clone());
    CoarseAnchor {
        anchor: AnchorMesh {
            positions,
            faces: reference.faces.clone(),
            stage: AnchorStage::Coarse,
            source_indices: Some(source),
        },
        true_motions,
        state: next,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::DEFAULT_LEAF_CAPACITY;

    fn state(p: f64, pro: f64, sys: f64) -> KalmanState {
        KalmanState {
            p,
            sigma_pro: pro,
            sigma_sys: sys,
            prev_true_motion: None,
        }
    }

    #[test]
    fn gain_with_default_presets() {
        // p_hat = 0.01 + 0.001; gain = 0.011 / 0.0111
        let (g, p_hat) = kalman_gain(&state(0.01, 1e-3, 1e-4));
        assert!((p_hat - 0.011).abs() < 1e-15);
        assert!((g - 0.011 / 0.0111).abs() < 1e-15);
        assert!((g - 0.990990990990991).abs() < 1e-12);
        let next = update_covariance(&state(0.01, 1e-3, 1e-4), g, p_hat);
        assert!((next.p - 0.011 * 0.0001 / 0.0111).abs() < 1e-16);
        assert!((next.p - 9.909909909909e-5).abs() < 1e-15);
    }

    #[test]
    fn gain_limits() {
        assert!((kalman_gain(&state(0.01, 1e-3, 1e-300)).0 - 1.0).abs() < 1e-12);
        assert!(kalman_gain(&state(0.0, 1e-300, 1e-4)).0 < 1e-12);
        let s = state(0.5, 0.1, 0.2);
        assert_eq!(update_covariance(&s, 1.0, 0.6).p, 0.0);
        assert_eq!(update_covariance(&s, 0.0, 0.6).p, 0.6);
    }

    #[test]
    fn fuse_cases() {
        let z = Vec3::zeros();
        assert_eq!(fuse(Some(z), Some(Vec3::x()), 0.5), Vec3::new(0.5, 0.0, 0.0));
        assert_eq!(fuse(None, None, 0.3), z);
        assert_eq!(fuse(Some(Vec3::new(2.0, 1.0, 0.0)), None, 0.3), Vec3::new(2.0, 1.0, 0.0));
        assert_eq!(fuse(None, Some(Vec3::y()), 0.3), Vec3::y());
    }

    #[test]
    fn prediction_and_measurement() {
        let mut s = state(0.0, 1.0, 1.0);
        assert_eq!(predict_motion(&s, 0), None);
        s.prev_true_motion = Some(MotionField(vec![Vec3::x(), Vec3::zeros()]));
        assert_eq!(predict_motion(&s, 0), Some(Vec3::x()));
        assert_eq!(predict_motion(&s, 1), Some(Vec3::zeros()));

        let mesh = Mesh::new(
            vec![Vec3::zeros(), Vec3::x(), Vec3::y()],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let adj = AdjacencyMap::build(&mesh);
        let mut corrected = vec![None, Some(Vec3::new(1.0, 0.0, 0.0)), None];
        assert_eq!(measure_motion(&adj, &corrected, 0), Some(Vec3::x()));
        corrected[2] = Some(Vec3::new(3.0, 0.0, 0.0));
        assert_eq!(measure_motion(&adj, &corrected, 0), Some(Vec3::new(2.0, 0.0, 0.0)));
        assert_eq!(measure_motion(&adj, &[None, None, None], 0), None);
    }

    #[test]
    fn static_frame_has_zero_motion() {
        let mesh = Mesh::new(
            vec![Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let oct = VertexOctree::build(&mesh.vertices, DEFAULT_LEAF_CAPACITY).unwrap();
        let out = generate_coarse_anchor(&mesh, &oct, &KalmanState::new(KalmanParams::LOW_MOTION));
        assert!(out.true_motions.0.iter().all(|m| *m == Vec3::zeros()));
        assert_eq!(out.anchor.faces, mesh.faces);
        assert_eq!(out.anchor.stage, AnchorStage::Coarse);
        assert!(out.state.prev_true_motion.is_some());
    }
}
