use super::ScoringError;
use crate::geometry::{CameraModel, LabelImage};
use crate::scene::{render_instances, Scene};

/// `visible / unoccluded`, with 0 for a fully hidden instance.
pub fn visibility_ratio(visible: usize, unoccluded: usize, id: u32) -> Result<f64, ScoringError> {
    if unoccluded == 0 {
        return Err(ScoringError::DegenerateView(id));
    }
    Ok((visible as f64 / unoccluded as f64).min(1.0))
}

/// Fraction of an instance's unoccluded pixel area that is visible in the
/// full scene. `full` must be the label image of the whole scene under
/// `camera`.
pub fn visibility_score(
    scene: &Scene,
    camera: &CameraModel,
    full: &LabelImage,
    target: u32,
) -> Result<f64, ScoringError> {
    if scene.instance(target).is_none() {
        return Err(ScoringError::UnknownInstance(target));
    }
    let alone = render_instances(scene, camera, &[target]);
    visibility_ratio(full.pixel_count(target), alone.pixel_count(target), target)
}
