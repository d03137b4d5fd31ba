use super::{Scene, SceneError};
use crate::geometry::{
    estimate_normals, rasterize_labels, CameraModel, LabelImage, PointCloud, BACKGROUND,
    DEFAULT_NORMAL_K,
};

/// Label image of the whole scene.
pub fn render_scene(scene: &Scene, camera: &CameraModel) -> LabelImage {
    rasterize_labels(&scene.raster_items(), camera)
}

/// Label image with only the listed instances present.
pub fn render_instances(scene: &Scene, camera: &CameraModel, ids: &[u32]) -> LabelImage {
    let items: Vec<_> = scene
        .raster_items()
        .into_iter()
        .filter(|it| ids.contains(&it.instance))
        .collect();
    rasterize_labels(&items, camera)
}

/// Back-projects every foreground pixel (row-major order) to a 3D point
/// tagged with its instance id.
pub fn cloud_from_labels(img: &LabelImage, camera: &CameraModel) -> PointCloud {
    let mut points = Vec::new();
    let mut ids = Vec::new();
    for v in 0..img.height {
        for u in 0..img.width {
            let i = v as usize * img.width as usize + u as usize;
            if img.labels[i] != BACKGROUND {
                points.push(camera.back_project(u, v, img.depth[i]));
                ids.push(img.labels[i]);
            }
        }
    }
    PointCloud {
        points,
        normals: None,
        instance_ids: Some(ids),
    }
}

/// Observed point cloud of a scene with PCA normals (k = 16).
pub fn scene_to_cloud(scene: &Scene, camera: &CameraModel) -> Result<PointCloud, SceneError> {
    let img = render_scene(scene, camera);
    let cloud = cloud_from_labels(&img, camera);
    if cloud.is_empty() {
        return Err(SceneError::EmptyView);
    }
    Ok(estimate_normals(&cloud, DEFAULT_NORMAL_K)?)
}
