//! Time-varying mesh compression built around anchor meshes.
//!
//! Every frame of a group of frames (GOF) is coded against the connectivity of
//! one decimated base mesh. Inter frames carry only per-vertex motions of that
//! base connectivity plus displacements of its subdivision, so the decoder
//! never needs per-frame topology.
//!
//! The encoder builds the anchor for an inter frame in three stages:
//!
//! 1. [`align`]: nearest-vertex matching of the reference base mesh into the
//!    target frame through an octree.
//! 2. [`motion`]: Kalman fusion of temporally predicted and spatially measured
//!    motions, followed by nearest-vertex snapping of the compensated points.
//! 3. [`qem`]: per-vertex quadric-error refinement along the cheapest incident
//!    edge of the target mesh.
//!
//! The anchor is then subdivided ([`subdivision`]), displacements to the target
//! surface are quantized with a valence-adaptive step and arithmetic coded
//! ([`entropy`]), and everything is packed into a checksummed container
//! ([`bitstream`]). [`metrics`] provides D1/D2 PSNR and BD-rate for evaluation.

pub mod align;
pub mod bitstream;
pub mod commands;
pub mod entropy;
pub mod error;
pub mod mesh;
pub mod metrics;
pub mod motion;
pub mod qem;
pub mod spatial;
pub mod subdivision;
pub mod synth;

pub use error::{Error, Result};
pub use mesh::{AdjacencyMap, Mesh, MeshSequence, Vec3};
