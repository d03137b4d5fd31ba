//! Procedural parcel piles: parcel meshes, mass properties, drop-and-settle
//! generation, rendering to point clouds and the on-disk scene format.

mod cloud;
mod generate;
pub mod io;
mod parcel;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{CameraModel, GeometryError, Pose, RasterItem, RayScene, TriangleMesh, Vec3};

pub use cloud::{cloud_from_labels, render_instances, render_scene, scene_to_cloud};
pub use generate::{generate_scene, sample_object_count, CameraSpec, SceneConfig};
pub use io::{read_scene, write_scene, SCENE_FILE, SCENE_SCHEMA};
pub use parcel::{make_parcel, mass_properties, CYLINDER_SEGMENTS};

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("parcel dimensions out of range: {0}")]
    BadDims(String),
    #[error("mesh is open or inside-out (signed volume {0})")]
    OpenMesh(f64),
    #[error("could not place object {index} after {attempts} attempts")]
    PlacementFailed { index: usize, attempts: usize },
    #[error("camera sees no foreground pixels")]
    EmptyView,
    #[error("invalid scene config: {0}")]
    BadConfig(String),
    #[error("malformed scene file {path}: {msg}")]
    Malformed { path: String, msg: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParcelKind {
    Rectangular,
    Planar,
    Cylindrical,
}

/// Parcel primitive. Boxes use full extents; cylinders are
/// `(radius, radius, height)` with the axis along local z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParcelShape {
    pub kind: ParcelKind,
    pub dims: [f64; 3],
}

/// Inner extents of the bin. The floor is the plane z = 0 and the bin is
/// centred on the z axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinBox {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BinBox {
    pub fn contains_xy(&self, min: &Vec3, max: &Vec3, tol: f64) -> bool {
        min.x >= -self.x / 2.0 - tol
            && max.x <= self.x / 2.0 + tol
            && min.y >= -self.y / 2.0 - tol
            && max.y <= self.y / 2.0 + tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneInstance {
    pub id: u32,
    /// Mesh in the parcel's local frame.
    pub mesh: TriangleMesh,
    pub pose: Pose,
    pub mass: f64,
    /// Centre of mass, world frame.
    pub com: Vec3,
    pub density: f64,
}

impl SceneInstance {
    pub fn world_mesh(&self) -> TriangleMesh {
        self.mesh.transformed(&self.pose)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub instances: Vec<SceneInstance>,
    pub bin: BinBox,
    pub camera: CameraModel,
    pub seed: u64,
    /// Coulomb friction coefficient; recorded only.
    pub friction: f64,
}

impl Scene {
    pub fn instance(&self, id: u32) -> Option<&SceneInstance> {
        self.instances.iter().find(|i| i.id == id)
    }

    pub fn raster_items(&self) -> Vec<RasterItem<'_>> {
        self.instances
            .iter()
            .map(|i| RasterItem {
                mesh: &i.mesh,
                pose: &i.pose,
                instance: i.id,
            })
            .collect()
    }

    pub fn ray_scene(&self) -> RayScene {
        RayScene::new(self.instances.iter().map(|i| (&i.mesh, &i.pose, i.id)))
    }
}
