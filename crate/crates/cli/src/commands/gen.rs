use std::path::PathBuf;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use suction_core::formats::{write_cloud, CLOUD_FILE};
use suction_core::rng::derive_seed;
use suction_core::scene::{generate_scene, scene_to_cloud, write_scene, SceneConfig, SceneError};

use super::{parse_range, parse_resolution};
use crate::config::{self, Flags};
use crate::dataset::scene_name;
use crate::exit::{Coded, OrExit, PLACEMENT_FAILED};

#[derive(clap::Args)]
pub struct Args {
    /// Output dataset directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    cycles: Option<u32>,
    #[arg(long)]
    scenes_per_cycle: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Object count range, e.g. `1..50`.
    #[arg(long, value_parser = parse_range)]
    objects: Option<(u32, u32)>,
    /// Camera resolution, e.g. `512x512`.
    #[arg(long, value_parser = parse_resolution)]
    resolution: Option<(u32, u32)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub cycles: u32,
    pub scenes_per_cycle: u32,
    pub seed: u64,
    pub scene: SceneConfig,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            cycles: 10,
            scenes_per_cycle: 10,
            seed: 0,
            scene: SceneConfig::default(),
        }
    }
}

pub fn run(args: Args, file: &serde_json::Value) -> Result<()> {
    let mut flags = Flags::default()
        .set("cycles", args.cycles)
        .set("scenes_per_cycle", args.scenes_per_cycle)
        .set("seed", args.seed);
    if let Some(n) = args.objects {
        flags = flags.nested(&["scene", "n_objects"], json!(n));
    }
    if let Some(r) = args.resolution {
        flags = flags.nested(&["scene", "camera", "resolution"], json!(r));
    }
    let cfg: GenConfig = config::resolve(file, "gen", flags.into_map())?;
    cfg.scene.validate()?;
    let hash = config::hash(&cfg);

    let jobs: Vec<(u32, u32)> = (0..cfg.cycles)
        .flat_map(|c| (0..cfg.scenes_per_cycle).map(move |s| (c, s)))
        .collect();
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let results: Vec<Result<String>> = jobs
        .par_iter()
        .map(|&(c, s)| {
            let name = scene_name(c, s);
            let seed = derive_seed(cfg.seed, &[c as u64, s as u64]);
            let scene = generate_scene(&cfg.scene, seed).map_err(|e| {
                let code = if matches!(e, SceneError::PlacementFailed { .. }) {
                    PLACEMENT_FAILED
                } else {
                    1
                };
                anyhow::Error::new(e).context(Coded {
                    code,
                    what: format!("scene {name}"),
                })
            })?;
            let dir = args.out.join(&name);
            write_scene(&dir, &scene)?;
            let cloud =
                scene_to_cloud(&scene, &scene.camera).or_exit(1, format!("scene {name}"))?;
            write_cloud(&dir.join(CLOUD_FILE), &cloud)?;
            Ok(name)
        })
        .collect();
    let names = results.into_iter().collect::<Result<Vec<_>>>()?;

    config::write_json(
        &args.out.join("dataset.json"),
        &json!({ "schema": "dataset/1", "config": cfg, "config_hash": hash, "scenes": names }),
    )?;
    println!("generated {} scenes in {}", names.len(), args.out.display());
    Ok(())
}
