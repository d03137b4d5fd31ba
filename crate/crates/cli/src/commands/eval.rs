use std::path::PathBuf;

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use suction_core::eval::{
    evaluate_predictions, normal_std_baseline, EvalReport, Prediction, SceneRow,
    DEFAULT_BASELINE_K, DEFAULT_NMS_RADIUS, HEADLINE_THRESHOLDS, TOP_K,
};
use suction_core::formats::{read_predictions, PredRow, PRED_FILE, REPORT_FILE, REPORT_SCHEMA};
use suction_core::rng::derive_seed;
use suction_core::scoring::{
    sample_candidate_indices, SceneScorer, SuctionCandidate, SuctionModels,
};

use super::predict::{Sampler, SamplingArgs, SamplingConfig};
use super::{load_cloud, load_scene, parse_list};
use crate::config::{self, Flags};
use crate::dataset::require_scenes;
use crate::exit::{OrExit, MALFORMED_INPUT};

pub const DIFFUSION: &str = "diffusion";
pub const NORMAL_STD: &str = "normal-std";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    NormalStd,
}

#[derive(clap::Args)]
pub struct Args {
    /// Dataset directory with scenes and clouds.
    #[arg(long)]
    data: PathBuf,
    /// Model to sample predictions from.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Root holding per-scene `pred.csv` files from `predict`.
    #[arg(long, conflicts_with = "model")]
    pred: Option<PathBuf>,
    /// Also (or only) evaluate a baseline.
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
    #[command(flatten)]
    sampling: SamplingArgs,
    /// Comma-separated top-k values.
    #[arg(long, value_parser = parse_list)]
    topk: Option<Vec<usize>>,
    /// NMS radius in metres.
    #[arg(long)]
    nms: Option<f64>,
    /// Suction cup radius used for online scoring.
    #[arg(long)]
    cup_radius: Option<f64>,
    /// Report path (default: DATA/report.json).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub sampling: SamplingConfig,
    pub topk: Vec<usize>,
    pub nms: f64,
    pub cup_radius: f64,
    pub thresholds: Vec<f64>,
    pub baseline_k: usize,
    pub baseline: Option<Baseline>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            sampling: SamplingConfig::default(),
            topk: TOP_K.to_vec(),
            nms: DEFAULT_NMS_RADIUS,
            cup_radius: 0.015,
            thresholds: HEADLINE_THRESHOLDS.to_vec(),
            baseline_k: DEFAULT_BASELINE_K,
            baseline: None,
        }
    }
}

fn to_predictions(rows: &[PredRow]) -> Vec<Prediction> {
    rows.iter()
        .map(|r| Prediction {
            index: r.point_index,
            candidate: SuctionCandidate {
                contact: r.point,
                approach: r.normal,
            },
            confidence: r.confidence,
        })
        .collect()
}

pub fn run(args: Args, file: &serde_json::Value) -> Result<()> {
    let sampling = args.sampling.flags(Flags::default()).into_map();
    let mut flags = Flags::default()
        .set("topk", args.topk.clone())
        .set("nms", args.nms)
        .set("cup_radius", args.cup_radius)
        .set("baseline", args.baseline);
    if !sampling.is_empty() {
        flags = flags.nested(&["sampling"], serde_json::Value::Object(sampling));
    }
    let cfg: EvalConfig = config::resolve(file, "eval", flags.into_map())?;
    if args.model.is_none() && args.pred.is_none() && cfg.baseline.is_none() {
        bail!("nothing to evaluate: pass --model, --pred or --baseline");
    }
    let hash = config::hash(&cfg);
    let models = SuctionModels::with_cup_radius(cfg.cup_radius)?;
    let sampler = args
        .model
        .as_ref()
        .map(|m| Sampler::load(m, &cfg.sampling))
        .transpose()?;
    let scenes = require_scenes(&args.data)?;

    let results: Vec<Result<Vec<SceneRow>>> = scenes
        .par_iter()
        .map(|dir| {
            let scene = load_scene(dir)?;
            let cloud = load_cloud(dir)?;
            let mut methods: Vec<(&str, Vec<Prediction>)> = Vec::new();
            if let Some(s) = &sampler {
                let seed = derive_seed(cfg.sampling.seed, &[dir.index as u64]);
                methods.push((
                    DIFFUSION,
                    to_predictions(&s.predict(&cloud, cfg.sampling.points, seed)?),
                ));
            }
            if let Some(root) = &args.pred {
                let rows = read_predictions(&root.join(&dir.name).join(PRED_FILE)).or_exit(
                    MALFORMED_INPUT,
                    format!("missing or malformed predictions for {}", dir.name),
                )?;
                methods.push((DIFFUSION, to_predictions(&rows)));
            }
            if cfg.baseline == Some(Baseline::NormalStd) {
                let indices = sample_candidate_indices(&cloud, cfg.sampling.points)?;
                let mut preds = normal_std_baseline(&cloud.select(&indices), cfg.baseline_k)?;
                for p in &mut preds {
                    p.index = indices[p.index];
                }
                methods.push((NORMAL_STD, preds));
            }
            let scorer = SceneScorer::with_cloud(&scene, models, cloud);
            let mut rows = Vec::new();
            for (method, preds) in methods {
                for row in
                    evaluate_predictions(&preds, &scorer, &cfg.topk, &cfg.thresholds, cfg.nms)?
                {
                    rows.push(SceneRow {
                        method: method.to_string(),
                        scene: dir.name.clone(),
                        row,
                    });
                }
            }
            Ok(rows)
        })
        .collect();
    let mut per_scene = Vec::new();
    for r in results {
        per_scene.extend(r?);
    }

    let report = EvalReport::new(
        json!({
            "schema": REPORT_SCHEMA,
            "eval": cfg,
            "config_hash": hash,
            "model_config_hash": sampler.as_ref().and_then(|s| s.model_hash.clone()),
            "steps": sampler.as_ref().map(|s| s.steps.clone()),
        }),
        per_scene,
    );
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.data.join(REPORT_FILE));
    config::write_json(&out, &report)?;
    print!("{}", report.table());
    Ok(())
}
