//! Analytic suction scores: seal, wrench, collision and visibility, their
//! product, and whole-scene annotation.

mod annotate;
mod collision;
mod seal;
mod visibility;
mod wrench;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Vec3};
use crate::scene::SceneError;

pub use annotate::{
    annotate_indices, annotate_scene, sample_candidate_indices, Annotation, SceneScorer,
};
pub use collision::{collision_score, point_in_gripper, workspace_radius};
pub use seal::{perimeter_count, seal_score, tangent_frame, ON_SURFACE_TOLERANCE};
pub use visibility::{visibility_ratio, visibility_score};
pub use wrench::{elastic_torque, wrench_formula, wrench_score};

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("candidate contact is not on any surface")]
    ContactOffSurface,
    #[error("instance {0} renders to zero pixels on its own")]
    DegenerateView(u32),
    #[error("no instance with id {0}")]
    UnknownInstance(u32),
    #[error("invalid candidate: {0}")]
    BadCandidate(String),
    #[error("invalid model: {0}")]
    BadModel(String),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Compliant cup rim: radius, number of rim samples and the largest
/// tolerated distance between the cup plane and the surface under a rim
/// sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuctionCupModel {
    pub radius: f64,
    pub n_perimeter: usize,
    pub max_gap: f64,
}

impl SuctionCupModel {
    /// Rim sampled every ~2 mm of arc, clamped to 8..=64 samples.
    pub fn new(radius: f64, max_gap: f64) -> Result<Self, ScoringError> {
        Self::with_perimeter(radius, perimeter_count(radius), max_gap)
    }

    pub fn with_perimeter(
        radius: f64,
        n_perimeter: usize,
        max_gap: f64,
    ) -> Result<Self, ScoringError> {
        if !(radius > 0.0) || n_perimeter < 8 || !(max_gap > 0.0) {
            return Err(ScoringError::BadModel(
                "cup needs r > 0, n >= 8, max_gap > 0".into(),
            ));
        }
        Ok(SuctionCupModel {
            radius,
            n_perimeter,
            max_gap,
        })
    }
}

impl Default for SuctionCupModel {
    fn default() -> Self {
        SuctionCupModel::new(0.015, 0.01).expect("valid defaults")
    }
}

/// Gripper body: a cylinder starting `standoff` above the contact along the
/// approach axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GripperModel {
    pub body_radius: f64,
    pub body_height: f64,
    pub standoff: f64,
}

impl Default for GripperModel {
    fn default() -> Self {
        GripperModel {
            body_radius: 0.02,
            body_height: 0.08,
            standoff: 0.005,
        }
    }
}

/// Contact-wrench constants. Only the material (bending torque) condition
/// is scored; `mu` and `suction_force` are carried for completeness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WrenchModel {
    pub mu: f64,
    /// material constant k, N·m/m
    pub k: f64,
    /// cup radius, m
    pub r: f64,
    /// suction force V_f, N
    pub suction_force: f64,
    pub g: f64,
    /// τ_thr = r·k·π
    pub tau_thr: f64,
}

impl WrenchModel {
    pub fn new(mu: f64, k: f64, r: f64, suction_force: f64) -> Result<Self, ScoringError> {
        if [mu, k, r, suction_force].iter().any(|x| !(*x > 0.0)) {
            return Err(ScoringError::BadModel(
                "wrench constants must be positive".into(),
            ));
        }
        Ok(WrenchModel {
            mu,
            k,
            r,
            suction_force,
            g: 9.81,
            tau_thr: r * k * std::f64::consts::PI,
        })
    }
}

impl Default for WrenchModel {
    fn default() -> Self {
        WrenchModel::new(0.5, 20.0, 0.015, 250.0).expect("valid defaults")
    }
}

/// The three models used for scoring, bundled.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SuctionModels {
    pub cup: SuctionCupModel,
    pub gripper: GripperModel,
    pub wrench: WrenchModel,
}

impl SuctionModels {
    /// Defaults with a different cup radius (rim sampling and τ_thr follow).
    pub fn with_cup_radius(radius: f64) -> Result<Self, ScoringError> {
        let d = SuctionModels::default();
        Ok(SuctionModels {
            cup: SuctionCupModel::new(radius, d.cup.max_gap)?,
            gripper: d.gripper,
            wrench: WrenchModel::new(d.wrench.mu, d.wrench.k, radius, d.wrench.suction_force)?,
        })
    }
}

/// Suction pose: contact point and unit approach direction pointing away
/// from the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuctionCandidate {
    pub contact: Vec3,
    pub approach: Vec3,
}

impl SuctionCandidate {
    pub fn new(contact: Vec3, approach: Vec3) -> Result<Self, ScoringError> {
        if ((approach.norm() - 1.0).abs() > 1e-6) || !contact.iter().all(|x| x.is_finite()) {
            return Err(ScoringError::BadCandidate(
                "approach must be a unit vector".into(),
            ));
        }
        if approach.z < 0.0 {
            return Err(ScoringError::BadCandidate(
                "approach points downward".into(),
            ));
        }
        Ok(SuctionCandidate { contact, approach })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreAnnotation {
    pub seal: f64,
    pub wrench: f64,
    pub collision: f64,
    pub visibility: f64,
    pub combined: f64,
}

impl ScoreAnnotation {
    pub fn from_parts(seal: f64, wrench: f64, collision: f64, visibility: f64) -> Self {
        ScoreAnnotation {
            seal,
            wrench,
            collision,
            visibility,
            combined: seal * wrench * collision * visibility,
        }
    }

    pub fn zero() -> Self {
        Self::from_parts(0.0, 0.0, 0.0, 0.0)
    }
}
