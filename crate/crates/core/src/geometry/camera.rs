use nalgebra::{Point3, Translation3, UnitQuaternion};

use super::{GeometryError, Pose, Vec3};

/// Projection model. Pixel `(u, v)` has its centre at `(u + 0.5, v + 0.5)`
/// in the continuous image coordinates used by `cx`/`cy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Pinhole {
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
    },
    /// Image plane spans `width_m × height_m`, centred on the optical axis.
    Orthographic {
        width_m: f64,
        height_m: f64,
    },
}

/// Camera with the convention x right, y down, z forward (viewing
/// direction). `pose` maps camera coordinates to world coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub pose: Pose,
    pub projection: Projection,
    pub width: u32,
    pub height: u32,
}

impl CameraModel {
    pub fn new(
        pose: Pose,
        projection: Projection,
        width: u32,
        height: u32,
    ) -> Result<Self, GeometryError> {
        if width == 0 || height == 0 {
            return Err(GeometryError::OutOfRange {
                what: "camera resolution",
            });
        }
        let ok = match projection {
            Projection::Pinhole { fx, fy, cx, cy } => {
                fx > 0.0 && fy > 0.0 && cx.is_finite() && cy.is_finite()
            }
            Projection::Orthographic { width_m, height_m } => width_m > 0.0 && height_m > 0.0,
        };
        if !ok {
            return Err(GeometryError::OutOfRange {
                what: "camera intrinsics",
            });
        }
        Ok(CameraModel {
            pose,
            projection,
            width,
            height,
        })
    }

    /// Orthographic camera at height `z` looking straight down, whose view
    /// exactly covers the rectangle `center ± (width_m, height_m)/2`.
    /// Image +u runs along world +x and +v along world −y.
    pub fn top_down_orthographic(
        center: (f64, f64),
        width_m: f64,
        height_m: f64,
        z: f64,
        resolution: (u32, u32),
    ) -> Result<Self, GeometryError> {
        let rot = UnitQuaternion::from_axis_angle(&Vec3::x_axis(), std::f64::consts::PI);
        let pose = Pose::from_parts(Translation3::new(center.0, center.1, z), rot);
        CameraModel::new(
            pose,
            Projection::Orthographic { width_m, height_m },
            resolution.0,
            resolution.1,
        )
    }

    /// Pinhole camera at `eye` looking straight down with a horizontal
    /// field of view `fov_x` (radians); principal point at the image centre.
    pub fn top_down_pinhole(
        eye: Vec3,
        fov_x: f64,
        resolution: (u32, u32),
    ) -> Result<Self, GeometryError> {
        let rot = UnitQuaternion::from_axis_angle(&Vec3::x_axis(), std::f64::consts::PI);
        let pose = Pose::from_parts(Translation3::from(eye), rot);
        let f = resolution.0 as f64 * 0.5 / (fov_x * 0.5).tan();
        CameraModel::new(
            pose,
            Projection::Pinhole {
                fx: f,
                fy: f,
                cx: resolution.0 as f64 * 0.5,
                cy: resolution.1 as f64 * 0.5,
            },
            resolution.0,
            resolution.1,
        )
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn world_to_camera(&self, p: &Vec3) -> Vec3 {
        self.pose.inverse_transform_point(&Point3::from(*p)).coords
    }

    pub fn camera_to_world(&self, p: &Vec3) -> Vec3 {
        (self.pose * Point3::from(*p)).coords
    }

    /// Continuous image coordinates and view-axis depth of a camera-frame
    /// point, or `None` if the point is not in front of the camera.
    pub fn project_camera_point(&self, p: &Vec3) -> Option<(f64, f64, f64)> {
        if p.z <= 0.0 {
            return None;
        }
        Some(match self.projection {
            Projection::Pinhole { fx, fy, cx, cy } => {
                (fx * p.x / p.z + cx, fy * p.y / p.z + cy, p.z)
            }
            Projection::Orthographic { width_m, height_m } => (
                (p.x / width_m + 0.5) * self.width as f64,
                (p.y / height_m + 0.5) * self.height as f64,
                p.z,
            ),
        })
    }

    /// Ray through a pixel centre, in camera coordinates. The direction is
    /// scaled so that its z component is 1.
    fn camera_ray(&self, u: u32, v: u32) -> (Vec3, Vec3) {
        let x = u as f64 + 0.5;
        let y = v as f64 + 0.5;
        match self.projection {
            Projection::Pinhole { fx, fy, cx, cy } => {
                (Vec3::zeros(), Vec3::new((x - cx) / fx, (y - cy) / fy, 1.0))
            }
            Projection::Orthographic { width_m, height_m } => (
                Vec3::new(
                    (x / self.width as f64 - 0.5) * width_m,
                    (y / self.height as f64 - 0.5) * height_m,
                    0.0,
                ),
                Vec3::z(),
            ),
        }
    }

    /// World-space ray through the centre of pixel `(u, v)`, unit direction.
    pub fn pixel_ray(&self, u: u32, v: u32) -> (Vec3, Vec3) {
        let (o, d) = self.camera_ray(u, v);
        (self.camera_to_world(&o), self.pose.rotation * d.normalize())
    }

    /// Converts a view-axis depth at a pixel into distance along the pixel's
    /// ray (identity for orthographic cameras).
    pub fn axis_depth_to_ray_depth(&self, u: u32, v: u32, z: f64) -> f64 {
        z * self.camera_ray(u, v).1.norm()
    }

    /// World point at ray-depth `depth` through the centre of pixel `(u, v)`.
    pub fn back_project(&self, u: u32, v: u32, depth: f64) -> Vec3 {
        let (o, d) = self.pixel_ray(u, v);
        o + d * depth
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn validates_intrinsics() {
        let pose = Pose::identity();
        assert!(CameraModel::new(
            pose,
            Projection::Pinhole {
                fx: 0.0,
                fy: 1.0,
                cx: 0.0,
                cy: 0.0
            },
            4,
            4
        )
        .is_err());
        assert!(CameraModel::new(
            pose,
            Projection::Orthographic {
                width_m: 1.0,
                height_m: 1.0
            },
            0,
            4
        )
        .is_err());
    }

    #[test]
    fn top_down_orthographic_covers_rectangle() {
        let cam = CameraModel::top_down_orthographic((0.0, 0.0), 2.0, 1.0, 5.0, (4, 2)).unwrap();
        let (o, d) = cam.pixel_ray(0, 0);
        assert_relative_eq!(d, -Vec3::z(), epsilon = 1e-12);
        assert_relative_eq!(o, Vec3::new(-0.75, 0.25, 5.0), epsilon = 1e-12);
        let p = cam.back_project(3, 1, 5.0);
        assert_relative_eq!(p, Vec3::new(0.75, -0.25, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn pinhole_projection_round_trip() {
        let cam = CameraModel::top_down_pinhole(Vec3::new(0.0, 0.0, 2.0), 1.0, (64, 48)).unwrap();
        let (o, d) = cam.pixel_ray(10, 40);
        let p = o + d * 1.7;
        let (x, y, z) = cam.project_camera_point(&cam.world_to_camera(&p)).unwrap();
        assert_relative_eq!(x, 10.5, epsilon = 1e-9);
        assert_relative_eq!(y, 40.5, epsilon = 1e-9);
        assert_relative_eq!(cam.axis_depth_to_ray_depth(10, 40, z), 1.7, epsilon = 1e-9);
    }
}
