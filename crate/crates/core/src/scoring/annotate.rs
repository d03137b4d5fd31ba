use std::sync::OnceLock;

use super::{
    collision_score, seal_score, visibility_score, wrench_score, ScoreAnnotation, ScoringError,
    SuctionCandidate, SuctionModels, ON_SURFACE_TOLERANCE,
};
use crate::geometry::{farthest_point_sample, KdTree, LabelImage, PointCloud, RayScene};
use crate::par;
use crate::scene::{render_scene, scene_to_cloud, Scene};

/// One scored candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annotation {
    /// Index into the observed scene cloud.
    pub point_index: usize,
    pub candidate: SuctionCandidate,
    pub scores: ScoreAnnotation,
}

/// Everything needed to score candidates in one scene: world-space meshes
/// for ray casting, the observed cloud with its kd-tree, the full-scene
/// label image and a per-instance visibility cache.
pub struct SceneScorer<'a> {
    pub scene: &'a Scene,
    pub models: SuctionModels,
    pub rays: RayScene,
    pub cloud: PointCloud,
    pub tree: KdTree,
    labels: LabelImage,
    visibility: Vec<OnceLock<Option<f64>>>,
}

impl<'a> SceneScorer<'a> {
    /// Builds a scorer observing the scene through its own camera.
    pub fn new(scene: &'a Scene, models: SuctionModels) -> Result<Self, ScoringError> {
        let cloud = scene_to_cloud(scene, &scene.camera)?;
        Ok(Self::with_cloud(scene, models, cloud))
    }

    /// Builds a scorer around an already observed cloud (with instance ids).
    pub fn with_cloud(scene: &'a Scene, models: SuctionModels, cloud: PointCloud) -> Self {
        let tree = KdTree::new(&cloud.points);
        SceneScorer {
            scene,
            models,
            rays: scene.ray_scene(),
            tree,
            cloud,
            labels: render_scene(scene, &scene.camera),
            visibility: scene.instances.iter().map(|_| OnceLock::new()).collect(),
        }
    }

    /// Visibility of an instance, computed once and cached.
    pub fn visibility(&self, id: u32) -> Result<f64, ScoringError> {
        let slot = self
            .scene
            .instances
            .iter()
            .position(|i| i.id == id)
            .ok_or(ScoringError::UnknownInstance(id))?;
        self.visibility[slot]
            .get_or_init(|| visibility_score(self.scene, &self.scene.camera, &self.labels, id).ok())
            .ok_or(ScoringError::DegenerateView(id))
    }

    /// All four sub-scores for a candidate on instance `target`. A
    /// sub-score whose evaluation fails is recorded as 0.
    pub fn score(&self, cand: &SuctionCandidate, target: u32) -> ScoreAnnotation {
        let seal = seal_score(&self.rays, cand, &self.models.cup).unwrap_or(0.0);
        let wrench = self
            .scene
            .instance(target)
            .map_or(0.0, |inst| wrench_score(inst, cand, &self.models.wrench));
        let collision =
            collision_score(&self.cloud, &self.tree, cand, &self.models.gripper, target);
        let visibility = self.visibility(target).unwrap_or(0.0);
        ScoreAnnotation::from_parts(seal, wrench, collision, visibility)
    }

    /// Combined score of an arbitrary predicted pose. The target instance is
    /// the one whose surface is nearest the contact; contacts farther than
    /// the on-surface tolerance from every surface score 0.
    pub fn online_score(&self, cand: &SuctionCandidate) -> f64 {
        match self
            .rays
            .nearest_surface(&cand.contact, ON_SURFACE_TOLERANCE)
        {
            Some((_, target)) => self.score(cand, target).combined,
            None => 0.0,
        }
    }
}

/// Farthest-point subset of a cloud (seeded at point 0), ascending.
pub fn sample_candidate_indices(
    cloud: &PointCloud,
    n_points: usize,
) -> Result<Vec<usize>, ScoringError> {
    let m = n_points.min(cloud.len());
    let mut idx = farthest_point_sample(cloud, m, 0)?;
    idx.sort_unstable();
    Ok(idx)
}

/// Scores a farthest-point subset of the observed cloud.
///
/// Candidates use the estimated normal as approach direction; those with
/// a downward normal are dropped. Rows come back ordered by point index.
pub fn annotate_scene(
    scene: &Scene,
    n_points: usize,
    models: &SuctionModels,
) -> Result<Vec<Annotation>, ScoringError> {
    let scorer = SceneScorer::new(scene, *models)?;
    let indices = sample_candidate_indices(&scorer.cloud, n_points)?;
    Ok(annotate_indices(&scorer, &indices))
}

/// Scores the given cloud points, dropping those without a usable
/// upward normal or instance id.
pub fn annotate_indices(scorer: &SceneScorer<'_>, indices: &[usize]) -> Vec<Annotation> {
    let cloud = &scorer.cloud;
    let rows = par::map_slice(indices, |&i| {
        let normal = cloud.normal(i)?;
        let candidate = SuctionCandidate::new(cloud.points[i], normal).ok()?;
        let target = cloud.instance_id(i)?;
        Some(Annotation {
            point_index: i,
            candidate,
            scores: scorer.score(&candidate, target),
        })
    });
    rows.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CameraModel, Pose, TriangleMesh, Vec3};
    use crate::scene::{BinBox, SceneInstance};
    use approx::assert_relative_eq;

    fn lone_box(res: u32) -> Scene {
        let mesh = TriangleMesh::cuboid(Vec3::new(-0.1, -0.08, 0.0), Vec3::new(0.1, 0.08, 0.06));
        Scene {
            instances: vec![SceneInstance {
                id: 0,
                mesh,
                pose: Pose::identity(),
                mass: 0.48,
                com: Vec3::new(0.0, 0.0, 0.03),
                density: 500.0,
            }],
            bin: BinBox {
                x: 0.4,
                y: 0.4,
                z: 0.3,
            },
            camera: CameraModel::top_down_orthographic((0.0, 0.0), 0.4, 0.4, 5.0, (res, res))
                .unwrap(),
            seed: 0,
            friction: 0.5,
        }
    }

    #[test]
    fn top_centre_of_lone_box_scores_one() {
        let s = lone_box(64);
        let scorer = SceneScorer::new(&s, SuctionModels::default()).unwrap();
        let cand = SuctionCandidate::new(Vec3::new(0.0, 0.0, 0.06), Vec3::z()).unwrap();
        let a = scorer.score(&cand, 0);
        assert_relative_eq!(a.combined, 1.0, epsilon = 1e-9);
        assert_relative_eq!(scorer.online_score(&cand), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn side_face_is_at_most_half() {
        let s = lone_box(64);
        let scorer = SceneScorer::new(&s, SuctionModels::default()).unwrap();
        let cand = SuctionCandidate::new(Vec3::new(0.1, 0.0, 0.03), Vec3::x()).unwrap();
        let a = scorer.score(&cand, 0);
        assert!(a.combined <= 0.5 + 1e-12, "{a:?}");
        assert!(a.wrench <= 0.5 + 1e-12);
    }

    #[test]
    fn off_surface_online_score_is_zero() {
        let s = lone_box(32);
        let scorer = SceneScorer::new(&s, SuctionModels::default()).unwrap();
        let cand = SuctionCandidate::new(Vec3::new(0.0, 0.0, 0.11), Vec3::z()).unwrap();
        assert_eq!(scorer.online_score(&cand), 0.0);
    }

    #[test]
    fn annotation_rows_sorted_and_consistent() {
        let s = lone_box(48);
        let rows = annotate_scene(&s, 64, &SuctionModels::default()).unwrap();
        assert_eq!(rows.len(), 64);
        assert!(rows.windows(2).all(|w| w[0].point_index < w[1].point_index));
        for r in &rows {
            let a = r.scores;
            assert_relative_eq!(
                a.combined,
                a.seal * a.wrench * a.collision * a.visibility,
                epsilon = 1e-12
            );
            for x in [a.seal, a.wrench, a.collision, a.visibility, a.combined] {
                assert!((0.0..=1.0).contains(&x));
            }
        }
    }
}
