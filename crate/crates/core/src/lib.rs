//! Synthetic parcel-pile scenes, analytic suction-grasp scoring and a
//! conditional diffusion model that predicts per-point suction scores.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: meshes, point clouds, kd-tree queries, ray casting,
//!   normal estimation, farthest point sampling and a z-buffer label
//!   rasterizer.
//! - [`scene`]: procedural parcels, drop-and-settle scene generation and
//!   the on-disk scene format.
//! - [`scoring`]: seal, wrench, collision and visibility scores and the
//!   whole-scene annotator.
//! - [`diffusion`]: cosine schedule, forward noising, the gated denoiser,
//!   SGD training and DDIM sampling.
//! - [`eval`]: NMS, online re-scoring, AP and the normal-deviation baseline.
//! - [`formats`]: CSV readers and writers shared by the CLI.
//!
//! With the default `parallel` feature the inner loops run on rayon; the
//! results are bit-identical to the sequential build.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diffusion;
pub mod error;
pub mod eval;
pub mod formats;
pub mod geometry;
pub mod par;
pub mod rng;
pub mod scene;
pub mod scoring;

pub use error::{Error, Result};
pub use geometry::{Pose, Vec3};
