use std::f64::consts::TAU;

use super::{ParcelKind, ParcelShape, SceneError};
use crate::geometry::{TriangleMesh, Vec3};

pub const CYLINDER_SEGMENTS: usize = 32;

const DIM_RANGE: (f64, f64) = (0.02, 0.6);
const THICKNESS_RANGE: (f64, f64) = (0.002, 0.015);

fn in_range(x: f64, (lo, hi): (f64, f64)) -> bool {
    x >= lo && x <= hi
}

fn check_dims(shape: &ParcelShape) -> Result<(), SceneError> {
    let d = shape.dims;
    let bad = || SceneError::BadDims(format!("{:?} {:?}", shape.kind, d));
    match shape.kind {
        ParcelKind::Rectangular => {
            if !d.iter().all(|&x| in_range(x, DIM_RANGE)) {
                return Err(bad());
            }
        }
        ParcelKind::Planar => {
            let mut s = d;
            s.sort_by(f64::total_cmp);
            if !in_range(s[0], THICKNESS_RANGE) || !s[1..].iter().all(|&x| in_range(x, DIM_RANGE)) {
                return Err(bad());
            }
        }
        ParcelKind::Cylindrical => {
            if d[0] != d[1] || !in_range(d[0], DIM_RANGE) || !in_range(d[2], DIM_RANGE) {
                return Err(bad());
            }
        }
    }
    Ok(())
}

/// Closed, outward-wound parcel mesh centred at the origin.
pub fn make_parcel(shape: &ParcelShape) -> Result<TriangleMesh, SceneError> {
    check_dims(shape)?;
    let d = Vec3::from(shape.dims);
    match shape.kind {
        ParcelKind::Rectangular | ParcelKind::Planar => Ok(TriangleMesh::cuboid(-d / 2.0, d / 2.0)),
        ParcelKind::Cylindrical => Ok(cylinder(d[0], d[2], CYLINDER_SEGMENTS)),
    }
}

fn cylinder(radius: f64, height: f64, segments: usize) -> TriangleMesh {
    let h = height / 2.0;
    let mut vertices = vec![Vec3::new(0.0, 0.0, -h), Vec3::new(0.0, 0.0, h)];
    for i in 0..segments {
        let a = TAU * i as f64 / segments as f64;
        let (s, c) = a.sin_cos();
        vertices.push(Vec3::new(radius * c, radius * s, -h));
        vertices.push(Vec3::new(radius * c, radius * s, h));
    }
    let ring = |i: usize, top: bool| (2 + 2 * (i % segments) + top as usize) as u32;
    let mut faces = Vec::with_capacity(4 * segments);
    for i in 0..segments {
        let (b0, t0, b1, t1) = (
            ring(i, false),
            ring(i, true),
            ring(i + 1, false),
            ring(i + 1, true),
        );
        faces.push([b0, b1, t1]);
        faces.push([b0, t1, t0]);
        faces.push([0, b1, b0]);
        faces.push([1, t0, t1]);
    }
    TriangleMesh { vertices, faces }
}

/// Mass and centre of mass (mesh frame) of a closed mesh of uniform
/// density, from signed tetrahedra about the origin.
pub fn mass_properties(mesh: &TriangleMesh, density: f64) -> Result<(f64, Vec3), SceneError> {
    let mut volume = 0.0;
    let mut moment = Vec3::zeros();
    for [a, b, c] in mesh.triangles() {
        let v = a.dot(&b.cross(&c)) / 6.0;
        volume += v;
        moment += (a + b + c) * (v / 4.0);
    }
    if !(volume > 0.0) {
        return Err(SceneError::OpenMesh(volume));
    }
    Ok((density * volume, moment / volume))
}
