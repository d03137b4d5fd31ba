use super::{point_triangle_distance, Aabb, Pose, TriangleMesh, Vec3};

/// Minimum accepted hit distance; keeps projection rays from re-hitting
/// the surface they start on.
pub const RAY_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    /// Instance id of the mesh that was hit.
    pub instance: u32,
    pub point: Vec3,
}

/// Watertight ray/triangle test (Woop, Benthin and Wald). Two-sided.
///
/// Returns the ray parameter of the intersection. Rays through a shared
/// edge or vertex hit at least one of the adjacent triangles.
pub fn intersect_triangle(origin: &Vec3, dir: &Vec3, tri: &[Vec3; 3]) -> Option<f64> {
    let kz = dir.iamax();
    let mut kx = (kz + 1) % 3;
    let mut ky = (kx + 1) % 3;
    if dir[kz] < 0.0 {
        std::mem::swap(&mut kx, &mut ky);
    }
    let sx = dir[kx] / dir[kz];
    let sy = dir[ky] / dir[kz];
    let sz = 1.0 / dir[kz];

    let a = tri[0] - origin;
    let b = tri[1] - origin;
    let c = tri[2] - origin;
    let ax = a[kx] - sx * a[kz];
    let ay = a[ky] - sy * a[kz];
    let bx = b[kx] - sx * b[kz];
    let by = b[ky] - sy * b[kz];
    let cx = c[kx] - sx * c[kz];
    let cy = c[ky] - sy * c[kz];

    let u = cx * by - cy * bx;
    let v = ax * cy - ay * cx;
    let w = bx * ay - by * ax;
    if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
        return None;
    }
    let det = u + v + w;
    if det == 0.0 {
        return None;
    }
    let az = sz * a[kz];
    let bz = sz * b[kz];
    let cz = sz * c[kz];
    let t = (u * az + v * bz + w * cz) / det;
    Some(t)
}

#[derive(Debug, Clone)]
struct WorldMesh {
    instance: u32,
    aabb: Aabb,
    triangles: Vec<[Vec3; 3]>,
}

/// A set of posed meshes flattened into world-space triangles.
#[derive(Debug, Clone, Default)]
pub struct RayScene {
    meshes: Vec<WorldMesh>,
}

impl RayScene {
    pub fn new<'a>(items: impl IntoIterator<Item = (&'a TriangleMesh, &'a Pose, u32)>) -> Self {
        let mut scene = RayScene::default();
        for (mesh, pose, id) in items {
            scene.push(mesh, pose, id);
        }
        scene
    }

    pub fn push(&mut self, mesh: &TriangleMesh, pose: &Pose, instance: u32) {
        let world = mesh.transformed(pose);
        self.meshes.push(WorldMesh {
            instance,
            aabb: world.aabb(),
            triangles: world.triangles().collect(),
        });
    }

    pub fn is_empty(&self) -> bool {
        self.meshes.is_empty()
    }

    /// Nearest hit with `t ≥ RAY_EPSILON`. `dir` must be unit length.
    pub fn ray_cast(&self, origin: &Vec3, dir: &Vec3) -> Option<Hit> {
        self.ray_cast_within(origin, dir, f64::INFINITY)
    }

    /// Like [`ray_cast`](Self::ray_cast) but ignores hits beyond `t_max`.
    pub fn ray_cast_within(&self, origin: &Vec3, dir: &Vec3, t_max: f64) -> Option<Hit> {
        let inv = dir.map(|d| 1.0 / d);
        let mut best: Option<(f64, u32)> = None;
        for m in &self.meshes {
            let limit = best.map_or(t_max, |b| b.0);
            let Some(entry) = m.aabb.ray_entry(origin, &inv, limit) else {
                continue;
            };
            if entry > limit {
                continue;
            }
            for tri in &m.triangles {
                if let Some(t) = intersect_triangle(origin, dir, tri) {
                    if t >= RAY_EPSILON && t <= t_max && best.is_none_or(|b| t < b.0) {
                        best = Some((t, m.instance));
                    }
                }
            }
        }
        best.map(|(t, instance)| Hit {
            t,
            instance,
            point: origin + dir * t,
        })
    }

    /// Closest surface within `max_dist` of `p`: `(distance, instance)`.
    /// Ties go to the instance pushed first.
    pub fn nearest_surface(&self, p: &Vec3, max_dist: f64) -> Option<(f64, u32)> {
        let mut best: Option<(f64, u32)> = None;
        for m in &self.meshes {
            let limit = best.map_or(max_dist, |b| b.0);
            if m.aabb.distance(p) > limit {
                continue;
            }
            for tri in &m.triangles {
                let d = point_triangle_distance(p, tri);
                if d <= max_dist && best.is_none_or(|b| d < b.0) {
                    best = Some((d, m.instance));
                }
            }
        }
        best
    }
}
