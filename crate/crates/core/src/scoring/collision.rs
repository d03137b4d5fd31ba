use super::{GripperModel, SuctionCandidate};
use crate::geometry::{KdTree, PointCloud, Vec3};

/// Radius of the workspace searched around the contact; it encloses the
/// whole gripper cylinder.
pub fn workspace_radius(grip: &GripperModel) -> f64 {
    grip.standoff + grip.body_height + grip.body_radius
}

/// Whether `p` lies inside (or on) the gripper cylinder for `cand`.
pub fn point_in_gripper(p: &Vec3, cand: &SuctionCandidate, grip: &GripperModel) -> bool {
    let n = cand.approach;
    let base = cand.contact + n * grip.standoff;
    let d = p - base;
    let along = d.dot(&n);
    if !(0.0..=grip.body_height).contains(&along) {
        return false;
    }
    (d - n * along).norm() <= grip.body_radius
}

/// 1 if no point of another instance lies inside the gripper body, else 0.
///
/// `tree` must be built over `cloud.points`; points without an instance id
/// count as foreign.
pub fn collision_score(
    cloud: &PointCloud,
    tree: &KdTree,
    cand: &SuctionCandidate,
    grip: &GripperModel,
    target_id: u32,
) -> f64 {
    let ids = cloud.instance_ids.as_deref();
    let hit = tree
        .radius_query(&cand.contact, workspace_radius(grip))
        .into_iter()
        .any(|i| {
            ids.is_none_or(|ids| ids[i] != target_id)
                && point_in_gripper(&cloud.points[i], cand, grip)
        });
    if hit {
        0.0
    } else {
        1.0
    }
}
