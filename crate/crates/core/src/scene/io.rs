//! `scene.json` plus one OBJ per instance under `meshes/`.

use std::fs;
use std::path::Path;

use nalgebra::{Quaternion, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use super::{mass_properties, BinBox, Scene, SceneError, SceneInstance};
use crate::geometry::{obj, CameraModel, Pose, Projection, Vec3};

pub const SCENE_SCHEMA: &str = "scene/1";
pub const SCENE_FILE: &str = "scene.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoseDoc {
    pub quat_wxyz: [f64; 4],
    pub t: [f64; 3],
}

impl From<&Pose> for PoseDoc {
    fn from(p: &Pose) -> Self {
        let q = p.rotation.quaternion();
        let t = p.translation.vector;
        PoseDoc {
            quat_wxyz: [q.w, q.i, q.j, q.k],
            t: [t.x, t.y, t.z],
        }
    }
}

impl PoseDoc {
    pub fn to_pose(&self) -> Result<Pose, String> {
        let [w, i, j, k] = self.quat_wxyz;
        let q = Quaternion::new(w, i, j, k);
        let norm = q.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err("pose quaternion has zero or non-finite norm".into());
        }
        // keep stored bits when the file already holds a unit quaternion
        let rot = if (norm - 1.0).abs() < 1e-12 {
            UnitQuaternion::new_unchecked(q)
        } else {
            UnitQuaternion::from_quaternion(q)
        };
        Ok(Pose::from_parts(
            Translation3::new(self.t[0], self.t[1], self.t[2]),
            rot,
        ))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CameraDoc {
    #[serde(rename = "type")]
    pub kind: String,
    pub pose: PoseDoc,
    pub resolution: [u32; 2],
    pub params: serde_json::Map<String, serde_json::Value>,
}

impl From<&CameraModel> for CameraDoc {
    fn from(c: &CameraModel) -> Self {
        let mut params = serde_json::Map::new();
        let kind = match c.projection {
            Projection::Pinhole { fx, fy, cx, cy } => {
                for (k, v) in [("fx", fx), ("fy", fy), ("cx", cx), ("cy", cy)] {
                    params.insert(k.into(), v.into());
                }
                "pinhole"
            }
            Projection::Orthographic { width_m, height_m } => {
                params.insert("width_m".into(), width_m.into());
                params.insert("height_m".into(), height_m.into());
                "orthographic"
            }
        };
        CameraDoc {
            kind: kind.into(),
            pose: PoseDoc::from(&c.pose),
            resolution: [c.width, c.height],
            params,
        }
    }
}

impl CameraDoc {
    pub fn to_camera(&self) -> Result<CameraModel, String> {
        let get = |k: &str| {
            self.params
                .get(k)
                .and_then(|v| v.as_f64())
                .ok_or_else(|| format!("camera param `{k}` missing"))
        };
        let projection = match self.kind.as_str() {
            "pinhole" => Projection::Pinhole {
                fx: get("fx")?,
                fy: get("fy")?,
                cx: get("cx")?,
                cy: get("cy")?,
            },
            "orthographic" => Projection::Orthographic {
                width_m: get("width_m")?,
                height_m: get("height_m")?,
            },
            other => return Err(format!("unknown camera type `{other}`")),
        };
        CameraModel::new(
            self.pose.to_pose()?,
            projection,
            self.resolution[0],
            self.resolution[1],
        )
        .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub id: u32,
    pub mesh: String,
    pub pose: PoseDoc,
    pub mass: f64,
    pub com: [f64; 3],
    pub density: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneDoc {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub seed: u64,
    pub bin: BinBox,
    pub camera: CameraDoc,
    pub instances: Vec<InstanceDoc>,
    pub friction: f64,
}

fn default_schema() -> String {
    SCENE_SCHEMA.to_string()
}

pub fn mesh_file_name(id: u32) -> String {
    format!("meshes/instance_{id:04}.obj")
}

pub fn scene_doc(scene: &Scene) -> SceneDoc {
    SceneDoc {
        schema: SCENE_SCHEMA.into(),
        seed: scene.seed,
        bin: scene.bin,
        camera: CameraDoc::from(&scene.camera),
        instances: scene
            .instances
            .iter()
            .map(|i| InstanceDoc {
                id: i.id,
                mesh: mesh_file_name(i.id),
                pose: PoseDoc::from(&i.pose),
                mass: i.mass,
                com: [i.com.x, i.com.y, i.com.z],
                density: i.density,
            })
            .collect(),
        friction: scene.friction,
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SceneError + '_ {
    move |source| SceneError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `scene.json` and the instance meshes into `dir`.
pub fn write_scene(dir: &Path, scene: &Scene) -> Result<(), SceneError> {
    fs::create_dir_all(dir.join("meshes")).map_err(io_err(dir))?;
    for inst in &scene.instances {
        let path = dir.join(mesh_file_name(inst.id));
        fs::write(&path, obj::write(&inst.mesh)).map_err(io_err(&path))?;
    }
    let path = dir.join(SCENE_FILE);
    let mut text = serde_json::to_string_pretty(&scene_doc(scene)).expect("scene serializes");
    text.push('\n');
    fs::write(&path, text).map_err(io_err(&path))
}

/// Reads a scene written by [`write_scene`].
pub fn read_scene(dir: &Path) -> Result<Scene, SceneError> {
    let path = dir.join(SCENE_FILE);
    let malformed = |msg: String| SceneError::Malformed {
        path: path.display().to_string(),
        msg,
    };
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let doc: SceneDoc = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
    let camera = doc.camera.to_camera().map_err(&malformed)?;
    let mut instances = Vec::with_capacity(doc.instances.len());
    for inst in &doc.instances {
        let mesh_path = dir.join(&inst.mesh);
        let mesh_text = fs::read_to_string(&mesh_path).map_err(io_err(&mesh_path))?;
        let mesh = obj::parse(&mesh_text).map_err(|e| SceneError::Malformed {
            path: mesh_path.display().to_string(),
            msg: e.to_string(),
        })?;
        if !(inst.mass > 0.0) {
            return Err(malformed(format!(
                "instance {} has non-positive mass",
                inst.id
            )));
        }
        // closedness check; the stored mass/com stay authoritative
        mass_properties(&mesh, inst.density)
            .map_err(|e| malformed(format!("instance {}: {e}", inst.id)))?;
        instances.push(SceneInstance {
            id: inst.id,
            mesh,
            pose: inst.pose.to_pose().map_err(&malformed)?,
            mass: inst.mass,
            com: Vec3::from(inst.com),
            density: inst.density,
        });
    }
    if instances.is_empty() {
        return Err(malformed("scene has no instances".into()));
    }
    Ok(Scene {
        instances,
        bin: doc.bin,
        camera,
        seed: doc.seed,
        friction: doc.friction,
    })
}
