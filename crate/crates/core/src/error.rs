use thiserror::Error;

use crate::diffusion::DiffusionError;
use crate::eval::EvalError;
use crate::formats::FormatError;
use crate::geometry::GeometryError;
use crate::scene::SceneError;
use crate::scoring::ScoringError;

/// Any error raised by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Format(#[from] FormatError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
