use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{Translation3, UnitQuaternion};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{
    make_parcel, mass_properties, BinBox, ParcelKind, ParcelShape, Scene, SceneError, SceneInstance,
};
use crate::geometry::{CameraModel, Pose, RayScene, TriangleMesh, Vec3};
use crate::rng::{rng_for, Rng};

const MAX_ATTEMPTS: usize = 50;
const SUPPORT_GRID: (usize, usize) = (16, 8);
const DROP_HEIGHT: f64 = 1e3;

/// Camera used to observe generated scenes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CameraSpec {
    /// Orthographic, looking down, view exactly covering the bin floor.
    TopDownOrthographic { resolution: (u32, u32) },
    /// Pinhole above the bin centre at `height` with horizontal FOV `fov_x`.
    TopDownPinhole {
        height: f64,
        fov_x: f64,
        resolution: (u32, u32),
    },
}

impl CameraSpec {
    pub fn resolution(&self) -> (u32, u32) {
        match *self {
            CameraSpec::TopDownOrthographic { resolution }
            | CameraSpec::TopDownPinhole { resolution, .. } => resolution,
        }
    }

    pub fn with_resolution(self, res: (u32, u32)) -> Self {
        match self {
            CameraSpec::TopDownOrthographic { .. } => {
                CameraSpec::TopDownOrthographic { resolution: res }
            }
            CameraSpec::TopDownPinhole { height, fov_x, .. } => CameraSpec::TopDownPinhole {
                height,
                fov_x,
                resolution: res,
            },
        }
    }

    pub fn build(&self, bin: &BinBox) -> Result<CameraModel, SceneError> {
        Ok(match *self {
            CameraSpec::TopDownOrthographic { resolution } => {
                // high enough that no pile reaches the image plane
                CameraModel::top_down_orthographic(
                    (0.0, 0.0),
                    bin.x,
                    bin.y,
                    bin.z + 5.0,
                    resolution,
                )?
            }
            CameraSpec::TopDownPinhole {
                height,
                fov_x,
                resolution,
            } => CameraModel::top_down_pinhole(Vec3::new(0.0, 0.0, height), fov_x, resolution)?,
        })
    }
}

/// Randomisation ranges for [`generate_scene`]. All ranges are inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    pub n_objects: (u32, u32),
    pub bin: BinBox,
    /// Relative weights of rectangular, planar and cylindrical parcels.
    pub shape_weights: [f64; 3],
    /// kg/m³
    pub density: f64,
    pub friction_range: (f64, f64),
    pub camera: CameraSpec,
    pub box_extent: (f64, f64),
    pub planar_extent: (f64, f64),
    pub planar_thickness: (f64, f64),
    pub cylinder_radius: (f64, f64),
    pub cylinder_height: (f64, f64),
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            n_objects: (1, 50),
            bin: BinBox {
                x: 0.8,
                y: 0.8,
                z: 0.4,
            },
            shape_weights: [0.5, 0.3, 0.2],
            density: 500.0,
            friction_range: (0.3, 0.8),
            camera: CameraSpec::TopDownOrthographic {
                resolution: (512, 512),
            },
            box_extent: (0.05, 0.3),
            planar_extent: (0.08, 0.35),
            planar_thickness: (0.003, 0.015),
            cylinder_radius: (0.03, 0.08),
            cylinder_height: (0.1, 0.35),
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |m: &str| Err(SceneError::BadConfig(m.to_string()));
        let (lo, hi) = self.n_objects;
        if lo < 1 || hi > 50 || lo > hi {
            return bad("n_objects must satisfy 1 <= lo <= hi <= 50");
        }
        if !(self.density > 0.0) {
            return bad("density must be positive");
        }
        if !(self.bin.x > 0.0 && self.bin.y > 0.0 && self.bin.z > 0.0) {
            return bad("bin extents must be positive");
        }
        if self.shape_weights.iter().any(|w| !(*w >= 0.0))
            || self.shape_weights.iter().sum::<f64>() <= 0.0
        {
            return bad("shape weights must be non-negative with a positive sum");
        }
        let ranges = [
            ("friction_range", self.friction_range, (0.0, f64::INFINITY)),
            ("box_extent", self.box_extent, (0.02, 0.6)),
            ("planar_extent", self.planar_extent, (0.02, 0.6)),
            ("planar_thickness", self.planar_thickness, (0.002, 0.015)),
            ("cylinder_radius", self.cylinder_radius, (0.02, 0.6)),
            ("cylinder_height", self.cylinder_height, (0.02, 0.6)),
        ];
        for (name, (a, b), (min, max)) in ranges {
            if !(a <= b && a >= min && b <= max) {
                return Err(SceneError::BadConfig(format!(
                    "{name} must be a non-empty range within [{min}, {max}]"
                )));
            }
        }
        Ok(())
    }
}

fn uniform(rng: &mut Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Number of parcels for a scene, uniform over the configured range.
pub fn sample_object_count(config: &SceneConfig, rng: &mut Rng) -> u32 {
    rng.random_range(config.n_objects.0..=config.n_objects.1)
}

fn sample_shape(config: &SceneConfig, rng: &mut Rng) -> ParcelShape {
    let w = config.shape_weights;
    let pick = rng.random_range(0.0..w.iter().sum::<f64>());
    let kind = if pick < w[0] {
        ParcelKind::Rectangular
    } else if pick < w[0] + w[1] {
        ParcelKind::Planar
    } else {
        ParcelKind::Cylindrical
    };
    let dims = match kind {
        ParcelKind::Rectangular => [
            uniform(rng, config.box_extent),
            uniform(rng, config.box_extent),
            uniform(rng, config.box_extent),
        ],
        ParcelKind::Planar => [
            uniform(rng, config.planar_extent),
            uniform(rng, config.planar_extent),
            uniform(rng, config.planar_thickness),
        ],
        ParcelKind::Cylindrical => {
            let r = uniform(rng, config.cylinder_radius);
            [r, r, uniform(rng, config.cylinder_height)]
        }
    };
    ParcelShape { kind, dims }
}

/// Support probes under a posed mesh: `(x, y, z of the lowest surface)`
/// on a 16 × 8 grid (128 samples) spanning its footprint, long side first.
fn support_samples(world: &TriangleMesh) -> Vec<(f64, f64, f64)> {
    let aabb = world.aabb();
    let own = RayScene::new([(world, &Pose::identity(), 0)]);
    let ext = aabb.extents();
    let (nu, nv) = if ext.x >= ext.y {
        SUPPORT_GRID
    } else {
        (SUPPORT_GRID.1, SUPPORT_GRID.0)
    };
    let lerp = |lo: f64, hi: f64, i: usize, n: usize| {
        let inset = (hi - lo) * 1e-6;
        (lo + inset) + (hi - lo - 2.0 * inset) * i as f64 / (n - 1) as f64
    };
    let mut out = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let x = lerp(aabb.min.x, aabb.max.x, i, nu);
            let y = lerp(aabb.min.y, aabb.max.y, j, nv);
            if let Some(bottom) = own.ray_cast(&Vec3::new(x, y, aabb.min.z - 1.0), &Vec3::z()) {
                out.push((x, y, bottom.point.z));
            }
        }
    }
    out
}

fn support_height(existing: &RayScene, x: f64, y: f64) -> Option<f64> {
    existing
        .ray_cast(&Vec3::new(x, y, DROP_HEIGHT), &-Vec3::z())
        .map(|h| h.point.z)
}

/// Vertical offset that drops `world` (posed at z = 0) onto the floor or
/// the first supporting surface found by the support probes.
fn settle_offset(existing: &RayScene, world: &TriangleMesh) -> f64 {
    // floor contact is exact: the lowest vertex rests on z = 0
    let mut dz = -world.aabb().min.z;
    for (x, y, bottom) in support_samples(world) {
        if let Some(s) = support_height(existing, x, y) {
            dz = dz.max(s - bottom);
        }
    }
    dz
}

/// Smallest vertical clearance between `world` and the floor or the
/// surfaces of `existing` beneath its support probes.
#[cfg(test)]
pub(crate) fn support_gap(existing: &RayScene, world: &TriangleMesh) -> f64 {
    let mut gap = world.aabb().min.z;
    for (x, y, bottom) in support_samples(world) {
        if let Some(s) = support_height(existing, x, y) {
            gap = gap.min(bottom - s);
        }
    }
    gap
}

/// Generates a parcel pile by sequential drop-and-settle.
///
/// Each parcel gets a random shape, a random yaw (cylinders additionally
/// stand or lie) and a random (x, y) keeping its footprint inside the bin;
/// it then moves straight down until it touches the floor or a previously
/// placed parcel. There is no rotation during descent. Deterministic in
/// `(config, seed)`.
pub fn generate_scene(config: &SceneConfig, seed: u64) -> Result<Scene, SceneError> {
    config.validate()?;
    let mut rng = rng_for(seed, &[]);
    let n = sample_object_count(config, &mut rng) as usize;
    let friction = uniform(&mut rng, config.friction_range);
    let bin = config.bin;
    let camera = config.camera.build(&bin)?;

    let mut instances: Vec<SceneInstance> = Vec::with_capacity(n);
    let mut existing = RayScene::default();
    for index in 0..n {
        let mut placed = None;
        for _ in 0..MAX_ATTEMPTS {
            let shape = sample_shape(config, &mut rng);
            let mesh = make_parcel(&shape)?;
            let yaw = rng.random_range(0.0..TAU);
            let lying = shape.kind == ParcelKind::Cylindrical && rng.random_bool(0.5);
            let rest = if lying {
                UnitQuaternion::from_axis_angle(&Vec3::x_axis(), FRAC_PI_2)
            } else {
                UnitQuaternion::identity()
            };
            let rot = UnitQuaternion::from_axis_angle(&Vec3::z_axis(), yaw) * rest;
            let local = mesh
                .transformed(&Pose::from_parts(Translation3::identity(), rot))
                .aabb();
            let (x_lo, x_hi) = (-bin.x / 2.0 - local.min.x, bin.x / 2.0 - local.max.x);
            let (y_lo, y_hi) = (-bin.y / 2.0 - local.min.y, bin.y / 2.0 - local.max.y);
            if x_lo > x_hi || y_lo > y_hi {
                continue;
            }
            let x = uniform(&mut rng, (x_lo, x_hi));
            let y = uniform(&mut rng, (y_lo, y_hi));
            let pose0 = Pose::from_parts(Translation3::new(x, y, 0.0), rot);
            let dz = settle_offset(&existing, &mesh.transformed(&pose0));
            let pose = Pose::from_parts(Translation3::new(x, y, dz), rot);
            let world = mesh.transformed(&pose).aabb();
            if !bin.contains_xy(&world.min, &world.max, 1e-9) {
                continue;
            }
            let (mass, com_local) = mass_properties(&mesh, config.density)?;
            let com = (pose * nalgebra::Point3::from(com_local)).coords;
            placed = Some(SceneInstance {
                id: index as u32,
                mesh,
                pose,
                mass,
                com,
                density: config.density,
            });
            break;
        }
        let inst = placed.ok_or(SceneError::PlacementFailed {
            index,
            attempts: MAX_ATTEMPTS,
        })?;
        existing.push(&inst.mesh, &inst.pose, inst.id);
        instances.push(inst);
    }
    Ok(Scene {
        instances,
        bin,
        camera,
        seed,
        friction,
    })
}
