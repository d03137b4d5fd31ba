use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::exit::{coded, OrExit, EMPTY_DATASET, MALFORMED_INPUT};

/// One scene directory, `cycle_%04d/scene_%04d`.
#[derive(Debug, Clone)]
pub struct SceneDir {
    pub name: String,
    pub path: PathBuf,
    /// Position in the sorted listing; keys per-scene random streams.
    pub index: usize,
}

pub fn scene_name(cycle: u32, scene: u32) -> String {
    format!("cycle_{cycle:04}/scene_{scene:04}")
}

fn sorted_dirs(dir: &Path, prefix: &str) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with(prefix) && entry.file_type()?.is_dir() {
            out.push((name, entry.path()));
        }
    }
    out.sort();
    Ok(out)
}

/// All scene directories under `root` in lexicographic order.
pub fn list_scenes(root: &Path) -> Result<Vec<SceneDir>> {
    if !root.is_dir() {
        return Err(coded(
            MALFORMED_INPUT,
            format!("{} is not a dataset directory", root.display()),
        ));
    }
    let mut scenes = Vec::new();
    for (cycle, cpath) in
        sorted_dirs(root, "cycle_").or_exit(MALFORMED_INPUT, "unreadable dataset")?
    {
        for (scene, spath) in
            sorted_dirs(&cpath, "scene_").or_exit(MALFORMED_INPUT, "unreadable dataset")?
        {
            scenes.push(SceneDir {
                name: format!("{cycle}/{scene}"),
                path: spath,
                index: scenes.len(),
            });
        }
    }
    Ok(scenes)
}

/// Like [`list_scenes`] but an empty listing is an error.
pub fn require_scenes(root: &Path) -> Result<Vec<SceneDir>> {
    let scenes = list_scenes(root)?;
    if scenes.is_empty() {
        return Err(coded(
            EMPTY_DATASET,
            format!("no scenes under {}", root.display()),
        ));
    }
    Ok(scenes)
}
