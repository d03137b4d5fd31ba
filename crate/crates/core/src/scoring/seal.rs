use std::f64::consts::TAU;

use super::{ScoringError, SuctionCandidate, SuctionCupModel};
use crate::geometry::{RayScene, Vec3};

/// Contacts farther than this from every surface are rejected.
pub const ON_SURFACE_TOLERANCE: f64 = 1e-4;

/// Rim sample count for a cup radius: one sample per ~2 mm of arc,
/// clamped to `[8, 64]`.
pub fn perimeter_count(radius: f64) -> usize {
    ((TAU * radius / 0.002).round() as i64).clamp(8, 64) as usize
}

/// Orthonormal tangent axes `(a, b)` for an approach direction `n`, with
/// `a = normalize(n × x̂)`, falling back to `n × ŷ` when `n ∥ x̂`.
pub fn tangent_frame(n: &Vec3) -> (Vec3, Vec3) {
    let mut a = n.cross(&Vec3::x());
    if a.norm() < 1e-6 {
        a = n.cross(&Vec3::y());
    }
    let a = a.normalize();
    (a, n.cross(&a))
}

/// Seal score from the stretch of the projected cup rim.
///
/// Rim samples are placed in the tangent plane at the contact and projected
/// along `-n` onto the scene. Each rim segment's stretch ratio is capped at
/// 1; the score is one minus the worst ratio. A rim sample whose projection
/// misses, or lands more than `max_gap` from the cup plane, breaks the seal.
pub fn seal_score(
    rays: &RayScene,
    cand: &SuctionCandidate,
    cup: &SuctionCupModel,
) -> Result<f64, ScoringError> {
    if rays
        .nearest_surface(&cand.contact, ON_SURFACE_TOLERANCE)
        .is_none()
    {
        return Err(ScoringError::ContactOffSurface);
    }
    let n = cand.approach;
    let (a, b) = tangent_frame(&n);
    let count = cup.n_perimeter;
    let rim: Vec<Vec3> = (0..count)
        .map(|i| {
            let (s, c) = (TAU * i as f64 / count as f64).sin_cos();
            cand.contact + (a * c + b * s) * cup.radius
        })
        .collect();
    let mut projected = Vec::with_capacity(count);
    for v in &rim {
        let origin = v + n * cup.max_gap;
        match rays.ray_cast_within(&origin, &-n, 2.0 * cup.max_gap) {
            Some(hit) => projected.push(hit.point),
            None => return Ok(0.0),
        }
    }
    let mut worst = f64::NEG_INFINITY;
    for i in 0..count {
        let j = (i + 1) % count;
        let l = (rim[j] - rim[i]).norm();
        let l_proj = (projected[j] - projected[i]).norm();
        worst = worst.max(((l_proj - l) / l).min(1.0));
    }
    Ok((1.0 - worst).clamp(0.0, 1.0))
}
