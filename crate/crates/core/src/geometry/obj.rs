//! Minimal Wavefront OBJ: `v x y z` and triangular `f i j k` (1-based).
//! Other statements are ignored; polygons with more than three corners are
//! rejected.

use std::fmt::Write as _;

use super::{GeometryError, TriangleMesh, Vec3};

pub fn parse(text: &str) -> Result<TriangleMesh, GeometryError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let err = |msg: &str| GeometryError::Obj {
            line,
            msg: msg.to_string(),
        };
        let mut tok = raw.split_whitespace();
        match tok.next() {
            Some("v") => {
                let xyz: Vec<f64> = tok
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|_| err("bad vertex coordinate")))
                    .collect::<Result<_, _>>()?;
                if xyz.len() != 3 {
                    return Err(err("vertex needs three coordinates"));
                }
                vertices.push(Vec3::new(xyz[0], xyz[1], xyz[2]));
            }
            Some("f") => {
                let idx: Vec<u32> = tok
                    .map(|t| {
                        // accept `i/t/n` forms, keep the position index
                        let head = t.split('/').next().unwrap_or("");
                        match head.parse::<u32>() {
                            Ok(i) if i >= 1 => Ok(i - 1),
                            _ => Err(err("bad face index")),
                        }
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() != 3 {
                    return Err(err("only triangular faces are supported"));
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, faces)
}

pub fn write(mesh: &TriangleMesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z).unwrap();
    }
    for f in &mesh.faces {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let m = TriangleMesh::cuboid(Vec3::new(-0.1, -0.2 / 3.0, 0.0), Vec3::new(0.1, 0.7, 1e-3));
        assert_eq!(parse(&write(&m)).unwrap(), m);
    }

    #[test]
    fn ignores_other_statements() {
        let text = "# comment\no thing\nv 0 0 0\nv 1 0 0\nvn 0 0 1\nv 0 1 0\nusemtl x\nf 1/1/1 2/2/1 3/3/1\n";
        let m = parse(text).unwrap();
        assert_eq!(m.vertices.len(), 3);
        assert_eq!(m.faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn rejects_quads_and_bad_indices() {
        let quad = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        assert!(matches!(
            parse(quad),
            Err(GeometryError::Obj { line: 5, .. })
        ));
        assert!(parse("v 0 0 0\nf 0 1 2\n").is_err());
        assert!(matches!(
            parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n"),
            Err(GeometryError::InvalidMesh(_))
        ));
    }
}
