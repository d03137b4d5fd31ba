use std::path::PathBuf;

use anyhow::Result;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use suction_core::formats::{write_labels, LabelRow, LABELS_FILE};
use suction_core::scoring::{
    annotate_indices, sample_candidate_indices, SceneScorer, SuctionModels,
};

use super::{load_cloud, load_scene};
use crate::config::{self, Flags};
use crate::dataset::require_scenes;

#[derive(clap::Args)]
pub struct Args {
    /// Dataset directory produced by `gen`.
    #[arg(long)]
    data: PathBuf,
    /// Farthest-point samples scored per scene.
    #[arg(long)]
    points: Option<usize>,
    /// Suction cup radius in metres.
    #[arg(long)]
    cup_radius: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnotateConfig {
    pub points: usize,
    pub cup_radius: f64,
}

impl Default for AnnotateConfig {
    fn default() -> Self {
        Self {
            points: 16384,
            cup_radius: 0.015,
        }
    }
}

pub fn run(args: Args, file: &serde_json::Value) -> Result<()> {
    let flags = Flags::default()
        .set("points", args.points)
        .set("cup_radius", args.cup_radius);
    let cfg: AnnotateConfig = config::resolve(file, "annotate", flags.into_map())?;
    let models = SuctionModels::with_cup_radius(cfg.cup_radius)?;
    let hash = config::hash(&cfg);
    let scenes = require_scenes(&args.data)?;

    let results: Vec<Result<(usize, f64)>> = scenes
        .par_iter()
        .map(|dir| {
            let scene = load_scene(dir)?;
            let cloud = load_cloud(dir)?;
            let scorer = SceneScorer::with_cloud(&scene, models, cloud);
            let indices = sample_candidate_indices(&scorer.cloud, cfg.points)?;
            let rows: Vec<LabelRow> = annotate_indices(&scorer, &indices)
                .iter()
                .map(LabelRow::from)
                .collect();
            write_labels(&dir.path.join(LABELS_FILE), &rows)?;
            Ok((rows.len(), rows.iter().map(|r| r.score).sum::<f64>()))
        })
        .collect();
    let stats = results.into_iter().collect::<Result<Vec<_>>>()?;

    let per_scene: Vec<_> = scenes
        .iter()
        .zip(&stats)
        .map(|(d, &(n, sum))| json!({ "scene": d.name, "rows": n, "mean_score": sum / n.max(1) as f64 }))
        .collect();
    let rows: usize = stats.iter().map(|s| s.0).sum();
    let mean = stats.iter().map(|s| s.1).sum::<f64>() / rows.max(1) as f64;
    config::write_json(
        &args.data.join("annotate.json"),
        &json!({ "schema": "annotate/1", "config": cfg, "config_hash": hash, "mean_score": mean, "scenes": per_scene }),
    )?;
    println!(
        "annotated {} scenes, {rows} rows, mean score {mean:.4}",
        scenes.len()
    );
    Ok(())
}
