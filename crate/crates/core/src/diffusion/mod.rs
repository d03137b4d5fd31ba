//! Conditional diffusion over per-point suction scores.
//!
//! Ground-truth scores are squashed into `(−scale, scale)`, noised with a
//! cosine schedule and denoised by a small gated network conditioned on
//! per-point geometric features. Inference runs deterministic DDIM.

mod features;
mod model;
mod sample;
mod schedule;
mod train;

use thiserror::Error;

pub use features::{condition_features, ConditionFeatures, FEATURE_NAMES, N_FEATURES};
pub use model::{time_embedding, Denoiser, DenoiserParams, ModelFile, MODEL_SCHEMA};
pub use sample::{
    leading_timesteps, sample, sample_from, sample_with_timesteps, uniform_timesteps,
};
pub use schedule::{
    cosine_schedule, ddim_step, ddim_update, forward_sample, scale_signal, unscale_signal,
    DiffusionSchedule, COSINE_OFFSET,
};
pub use train::{denoising_loss, loss_and_grad, train, TrainConfig, TrainOutcome, TrainSample};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffusionError {
    #[error("number of diffusion steps must be at least 1")]
    BadT,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("training set is empty")]
    EmptyDataset,
    #[error("invalid step pair {t} -> {t_prev}")]
    BadSteps { t: usize, t_prev: usize },
    #[error("point cloud has no normals")]
    MissingNormals,
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("malformed model file: {0}")]
    ModelFormat(String),
}
