//! Geometric primitives and spatial queries.

mod camera;
mod cloud;
mod fps;
mod kdtree;
mod mesh;
pub(crate) mod normals;
pub mod obj;
mod raster;
mod raycast;

use thiserror::Error;

pub use camera::{CameraModel, Projection};
pub use cloud::PointCloud;
pub use fps::farthest_point_sample;
pub use kdtree::KdTree;
pub use mesh::{point_triangle_distance, Aabb, TriangleMesh};
pub use normals::{estimate_normal_at, estimate_normals, orient_up, DEFAULT_NORMAL_K};
pub use raster::{rasterize_labels, LabelImage, RasterItem, BACKGROUND};
pub use raycast::{intersect_triangle, Hit, RayScene, RAY_EPSILON};

pub type Vec3 = nalgebra::Vector3<f64>;
/// Rigid transform, local frame to world frame.
pub type Pose = nalgebra::Isometry3<f64>;

pub const UP: Vec3 = Vec3::new(0.0, 0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("need more than {k} points, got {n}")]
    TooFewPoints { n: usize, k: usize },
    #[error("{what} out of range")]
    OutOfRange { what: &'static str },
    #[error("neighbourhood covariance is degenerate")]
    DegenerateNeighborhood,
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("parallel arrays differ in length")]
    LengthMismatch,
    #[error("obj line {line}: {msg}")]
    Obj { line: usize, msg: String },
}
