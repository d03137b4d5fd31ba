use std::collections::BTreeMap;

use super::{CameraModel, Pose, Projection, TriangleMesh};
use crate::par;

/// Label of pixels that see no surface.
pub const BACKGROUND: u32 = u32::MAX;

const BAND_ROWS: usize = 16;

/// Per-pixel instance labels and ray depths, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelImage {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<u32>,
    /// Distance along the pixel ray (pinhole) or along the view axis
    /// (orthographic); `+∞` for background.
    pub depth: Vec<f64>,
}

impl LabelImage {
    pub fn label(&self, u: u32, v: u32) -> u32 {
        self.labels[v as usize * self.width as usize + u as usize]
    }

    pub fn pixel_count(&self, instance: u32) -> usize {
        self.labels.iter().filter(|&&l| l == instance).count()
    }

    pub fn counts(&self) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for &l in &self.labels {
            if l != BACKGROUND {
                *out.entry(l).or_insert(0) += 1;
            }
        }
        out
    }

    pub fn foreground_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l != BACKGROUND).count()
    }
}

/// One posed mesh to draw.
#[derive(Debug, Clone, Copy)]
pub struct RasterItem<'a> {
    pub mesh: &'a TriangleMesh,
    pub pose: &'a Pose,
    pub instance: u32,
}

struct ScreenTri {
    xy: [(f64, f64); 3],
    /// view-axis depth (orthographic) or its reciprocal (pinhole)
    key: [f64; 3],
    area: f64,
    instance: u32,
    u_range: (usize, usize),
    v_range: (usize, usize),
}

fn edge(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
}

/// Z-buffer rasterization of instance labels, sampling pixel centres.
///
/// Triangles with a vertex on or behind the camera plane are dropped (no
/// near-plane clipping). Equal depths keep the earlier triangle.
pub fn rasterize_labels(items: &[RasterItem<'_>], camera: &CameraModel) -> LabelImage {
    let w = camera.width as usize;
    let h = camera.height as usize;
    let pinhole = matches!(camera.projection, Projection::Pinhole { .. });

    let mut tris = Vec::new();
    for item in items {
        for [a, b, c] in item.mesh.transformed(item.pose).triangles() {
            let cam = [a, b, c].map(|p| camera.world_to_camera(&p));
            let proj: Vec<_> = cam
                .iter()
                .filter_map(|p| camera.project_camera_point(p))
                .collect();
            if proj.len() < 3 {
                continue;
            }
            let xy = [
                (proj[0].0, proj[0].1),
                (proj[1].0, proj[1].1),
                (proj[2].0, proj[2].1),
            ];
            let area = edge(xy[0], xy[1], xy[2]);
            if area == 0.0 || !area.is_finite() {
                continue;
            }
            let key = if pinhole {
                [1.0 / proj[0].2, 1.0 / proj[1].2, 1.0 / proj[2].2]
            } else {
                [proj[0].2, proj[1].2, proj[2].2]
            };
            let min_x = xy.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            let max_x = xy.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
            let min_y = xy.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let max_y = xy.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            let u0 = (min_x - 0.5).ceil().max(0.0);
            let u1 = (max_x - 0.5).floor().min(w as f64 - 1.0);
            let v0 = (min_y - 0.5).ceil().max(0.0);
            let v1 = (max_y - 0.5).floor().min(h as f64 - 1.0);
            if u0 > u1 || v0 > v1 {
                continue;
            }
            tris.push(ScreenTri {
                xy,
                key,
                area,
                instance: item.instance,
                u_range: (u0 as usize, u1 as usize),
                v_range: (v0 as usize, v1 as usize),
            });
        }
    }

    let n_bands = h.div_ceil(BAND_ROWS);
    let bands = par::map_range(n_bands, |band| {
        let r0 = band * BAND_ROWS;
        let r1 = (r0 + BAND_ROWS).min(h);
        let mut labels = vec![BACKGROUND; (r1 - r0) * w];
        let mut zbuf = vec![f64::INFINITY; (r1 - r0) * w];
        for t in &tris {
            let va = t.v_range.0.max(r0);
            let vb = t.v_range.1.min(r1 - 1);
            if t.v_range.1 < r0 || t.v_range.0 >= r1 {
                continue;
            }
            for v in va..=vb {
                let py = v as f64 + 0.5;
                for u in t.u_range.0..=t.u_range.1 {
                    let p = (u as f64 + 0.5, py);
                    let e0 = edge(t.xy[1], t.xy[2], p);
                    let e1 = edge(t.xy[2], t.xy[0], p);
                    let e2 = edge(t.xy[0], t.xy[1], p);
                    let inside = if t.area > 0.0 {
                        e0 >= 0.0 && e1 >= 0.0 && e2 >= 0.0
                    } else {
                        e0 <= 0.0 && e1 <= 0.0 && e2 <= 0.0
                    };
                    if !inside {
                        continue;
                    }
                    let (l0, l1, l2) = (e0 / t.area, e1 / t.area, e2 / t.area);
                    let k = l0 * t.key[0] + l1 * t.key[1] + l2 * t.key[2];
                    let z = if pinhole { 1.0 / k } else { k };
                    let idx = (v - r0) * w + u;
                    if z > 0.0 && z < zbuf[idx] {
                        zbuf[idx] = z;
                        labels[idx] = t.instance;
                    }
                }
            }
        }
        (labels, zbuf)
    });

    let mut labels = Vec::with_capacity(w * h);
    let mut depth = Vec::with_capacity(w * h);
    for (band, (l, z)) in bands.into_iter().enumerate() {
        let r0 = band * BAND_ROWS;
        for (i, (lab, zz)) in l.into_iter().zip(z).enumerate() {
            let u = (i % w) as u32;
            let v = (r0 + i / w) as u32;
            labels.push(lab);
            depth.push(if lab == BACKGROUND {
                f64::INFINITY
            } else {
                camera.axis_depth_to_ray_depth(u, v, zz)
            });
        }
    }
    LabelImage {
        width: camera.width,
        height: camera.height,
        labels,
        depth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use approx::assert_relative_eq;

    fn box_mesh(min: Vec3, max: Vec3) -> TriangleMesh {
        TriangleMesh::cuboid(min, max)
    }

    fn ortho(res: u32) -> CameraModel {
        CameraModel::top_down_orthographic((0.0, 0.0), 1.0, 1.0, 5.0, (res, res)).unwrap()
    }

    #[test]
    fn empty_scene_is_background() {
        let img = rasterize_labels(&[], &ortho(16));
        assert!(img.labels.iter().all(|&l| l == BACKGROUND));
        assert!(img.depth.iter().all(|d| d.is_infinite()));
    }

    #[test]
    fn left_half_box_pixel_count() {
        let res = 64u32;
        let b = box_mesh(Vec3::new(-0.5, -0.5, 0.0), Vec3::new(0.0, 0.5, 0.2));
        let pose = Pose::identity();
        let img = rasterize_labels(
            &[RasterItem {
                mesh: &b,
                pose: &pose,
                instance: 1,
            }],
            &ortho(res),
        );
        let count = img.pixel_count(1) as i64;
        let expect = (res * res / 2) as i64;
        assert!((count - expect).abs() <= res as i64, "{count}");
        // top face depth: camera at z=5, top at 0.2
        let d = img.depth[img.labels.iter().position(|&l| l == 1).unwrap()];
        assert_relative_eq!(d, 4.8, epsilon = 1e-9);
    }

    #[test]
    fn front_box_hides_back_box() {
        let a = box_mesh(Vec3::new(-0.3, -0.3, 0.5), Vec3::new(0.3, 0.3, 0.6));
        let b = box_mesh(Vec3::new(-0.2, -0.2, 0.0), Vec3::new(0.2, 0.2, 0.1));
        let pose = Pose::identity();
        let items = [
            RasterItem {
                mesh: &b,
                pose: &pose,
                instance: 2,
            },
            RasterItem {
                mesh: &a,
                pose: &pose,
                instance: 1,
            },
        ];
        let img = rasterize_labels(&items, &ortho(32));
        assert_eq!(img.pixel_count(2), 0);
        assert!(img.pixel_count(1) > 0);
    }

    #[test]
    fn pinhole_depth_is_ray_distance() {
        let cam = CameraModel::top_down_pinhole(Vec3::new(0.0, 0.0, 2.0), 1.2, (48, 48)).unwrap();
        let b = box_mesh(Vec3::new(-2.0, -2.0, -0.1), Vec3::new(2.0, 2.0, 0.0));
        let pose = Pose::identity();
        let img = rasterize_labels(
            &[RasterItem {
                mesh: &b,
                pose: &pose,
                instance: 0,
            }],
            &cam,
        );
        assert_eq!(img.foreground_count(), 48 * 48);
        for (u, v) in [(0u32, 0u32), (10, 30), (47, 47)] {
            let d = img.depth[(v * 48 + u) as usize];
            let p = cam.back_project(u, v, d);
            assert_relative_eq!(p.z, 0.0, epsilon = 1e-9);
        }
    }
}
