pub mod annotate;
pub mod eval;
pub mod gen;
pub mod predict;
pub mod train;

use std::path::Path;

use anyhow::Result;
use suction_core::formats::{read_cloud, CLOUD_FILE};
use suction_core::geometry::PointCloud;
use suction_core::scene::{read_scene, Scene};

use crate::dataset::SceneDir;
use crate::exit::{OrExit, MALFORMED_INPUT};

pub const MANIFEST_SCHEMAS: [(&str, &str); 3] = [
    ("dataset.json", "dataset/1"),
    ("annotate.json", "annotate/1"),
    ("predict.json", "predict/1"),
];

pub fn load_scene(dir: &SceneDir) -> Result<Scene> {
    read_scene(&dir.path).or_exit(MALFORMED_INPUT, format!("malformed scene {}", dir.name))
}

pub fn load_cloud(dir: &SceneDir) -> Result<PointCloud> {
    load_cloud_at(&dir.path.join(CLOUD_FILE), &dir.name)
}

pub fn load_cloud_at(path: &Path, name: &str) -> Result<PointCloud> {
    read_cloud(path).or_exit(MALFORMED_INPUT, format!("malformed cloud for {name}"))
}

/// Parses `LO..HI`.
pub fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once("..").ok_or("expected LO..HI")?;
    let lo = a
        .trim()
        .parse()
        .map_err(|_| format!("bad lower bound {a:?}"))?;
    let hi = b
        .trim()
        .parse()
        .map_err(|_| format!("bad upper bound {b:?}"))?;
    Ok((lo, hi))
}

/// Parses `WxH`.
pub fn parse_resolution(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or("expected WxH")?;
    let w = a.trim().parse().map_err(|_| format!("bad width {a:?}"))?;
    let h = b.trim().parse().map_err(|_| format!("bad height {b:?}"))?;
    Ok((w, h))
}

/// Parses a comma-separated list of positive integers.
pub fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad value {p:?}"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsers() {
        assert_eq!(parse_range("1..10"), Ok((1, 10)));
        assert!(parse_range("3").is_err());
        assert_eq!(parse_resolution("256x192"), Ok((256, 192)));
        assert!(parse_resolution("256").is_err());
        assert_eq!(parse_list("1,50"), Ok(vec![1, 50]));
        assert!(parse_list("1,a").is_err());
    }
}
