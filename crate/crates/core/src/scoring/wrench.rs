use std::f64::consts::PI;

use super::{SuctionCandidate, WrenchModel};
use crate::geometry::{Vec3, UP};
use crate::scene::SceneInstance;

/// `(1 − min(1, |τ_e|/τ_thr)) · (1 − a/π)`.
pub fn wrench_formula(tau_e: f64, angle: f64, tau_thr: f64) -> f64 {
    (1.0 - (tau_e.abs() / tau_thr).min(1.0)) * (1.0 - angle / PI)
}

/// Gravity torque about the contact, with its twist component about the
/// approach axis removed. This is the torque the cup must resist by
/// bending.
pub fn elastic_torque(mass: f64, com: &Vec3, cand: &SuctionCandidate, g: f64) -> Vec3 {
    let force = Vec3::new(0.0, 0.0, -mass * g);
    let tau = (com - cand.contact).cross(&force);
    let n = cand.approach;
    tau - n * tau.dot(&n)
}

/// Material-condition wrench score, corrected by the angle between the
/// approach direction and the vertical.
pub fn wrench_score(instance: &SceneInstance, cand: &SuctionCandidate, wm: &WrenchModel) -> f64 {
    let tau_e = elastic_torque(instance.mass, &instance.com, cand, wm.g).norm();
    let angle = cand.approach.dot(&UP).clamp(-1.0, 1.0).acos();
    wrench_formula(tau_e, angle, wm.tau_thr).clamp(0.0, 1.0)
}
