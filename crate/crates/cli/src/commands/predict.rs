use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use suction_core::diffusion::{
    condition_features, cosine_schedule, leading_timesteps, sample_with_timesteps,
    uniform_timesteps, DenoiserParams, DiffusionSchedule, ModelFile, N_FEATURES,
};
use suction_core::formats::{write_predictions, PredRow, PRED_FILE};
use suction_core::geometry::PointCloud;
use suction_core::rng::derive_seed;
use suction_core::scoring::sample_candidate_indices;

use super::load_cloud;
use crate::config::{self, Flags};
use crate::dataset::require_scenes;
use crate::exit::{coded, OrExit, FEATURE_MISMATCH, MALFORMED_INPUT};

#[derive(clap::Args)]
pub struct Args {
    /// Dataset directory with rendered clouds.
    #[arg(long)]
    data: PathBuf,
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Output root for per-scene `pred.csv` (default: the dataset).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(clap::Args, Default)]
pub struct SamplingArgs {
    /// Inference steps (default: the model's training steps).
    #[arg(long)]
    infer_steps: Option<usize>,
    /// `uniform` spreads steps over the training range; `leading` uses
    /// the first training steps only.
    #[arg(long, value_enum)]
    schedule: Option<StepSchedule>,
    /// Farthest-point samples predicted per scene.
    #[arg(long)]
    points: Option<usize>,
    /// Seed for the initial noise.
    #[arg(long)]
    seed: Option<u64>,
}

impl SamplingArgs {
    pub fn flags(&self, flags: Flags) -> Flags {
        flags
            .set("infer_steps", self.infer_steps)
            .set("schedule", self.schedule)
            .set("points", self.points)
            .set("seed", self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepSchedule {
    #[default]
    Uniform,
    Leading,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    pub infer_steps: Option<usize>,
    pub schedule: StepSchedule,
    pub points: usize,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            infer_steps: None,
            schedule: StepSchedule::Uniform,
            points: 16384,
            seed: 0,
        }
    }
}

/// A loaded model with its schedule and inference steps.
pub struct Sampler {
    pub params: DenoiserParams,
    pub sched: DiffusionSchedule,
    pub steps: Vec<usize>,
    pub model_hash: Option<String>,
}

impl Sampler {
    pub fn load(path: &Path, cfg: &SamplingConfig) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: ModelFile = serde_json::from_str(&text).or_exit(
            MALFORMED_INPUT,
            format!("malformed model {}", path.display()),
        )?;
        if file.n_features != N_FEATURES {
            return Err(coded(
                FEATURE_MISMATCH,
                format!(
                    "model expects {} condition features, this build produces {N_FEATURES}",
                    file.n_features
                ),
            ));
        }
        let params = file.params().or_exit(
            MALFORMED_INPUT,
            format!("malformed model {}", path.display()),
        )?;
        let sched = cosine_schedule(file.t_train)?.with_scale(file.scale)?;
        let n = cfg.infer_steps.unwrap_or(file.t_train);
        let steps = match cfg.schedule {
            StepSchedule::Uniform => uniform_timesteps(file.t_train, n)?,
            StepSchedule::Leading => leading_timesteps(file.t_train, n)?,
        };
        Ok(Self {
            params,
            sched,
            steps,
            model_hash: file.config_hash,
        })
    }

    /// Scores for the farthest-point subset of `cloud`, keyed by cloud index.
    pub fn predict(&self, cloud: &PointCloud, points: usize, seed: u64) -> Result<Vec<PredRow>> {
        let indices = sample_candidate_indices(cloud, points)?;
        let sub = cloud.select(&indices);
        let features = condition_features(&sub)?;
        let scores = sample_with_timesteps(&self.params, &features, &self.sched, &self.steps, seed)
            .or_exit(
                FEATURE_MISMATCH,
                "model does not fit the condition features",
            )?;
        let normals = sub.normals.as_ref().expect("features required normals");
        Ok(indices
            .iter()
            .enumerate()
            .map(|(k, &i)| PredRow {
                point_index: i,
                point: sub.points[k],
                normal: normals[k],
                confidence: scores[k],
            })
            .collect())
    }
}

pub fn run(args: Args, file: &serde_json::Value) -> Result<()> {
    let flags = args.sampling.flags(Flags::default());
    let cfg: SamplingConfig = config::resolve(file, "predict", flags.into_map())?;
    let hash = config::hash(&cfg);
    let sampler = Sampler::load(&args.model, &cfg)?;
    let scenes = require_scenes(&args.data)?;
    let out_root = args.out.clone().unwrap_or_else(|| args.data.clone());

    let results: Vec<Result<usize>> = scenes
        .par_iter()
        .map(|dir| {
            let cloud = load_cloud(dir)?;
            let rows = sampler.predict(
                &cloud,
                cfg.points,
                derive_seed(cfg.seed, &[dir.index as u64]),
            )?;
            let out = out_root.join(&dir.name);
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            write_predictions(&out.join(PRED_FILE), &rows)?;
            Ok(rows.len())
        })
        .collect();
    let counts = results.into_iter().collect::<Result<Vec<_>>>()?;
    config::write_json(
        &out_root.join("predict.json"),
        &json!({
            "schema": "predict/1",
            "config": cfg,
            "config_hash": hash,
            "model_config_hash": sampler.model_hash,
            "steps": sampler.steps,
            "scenes": scenes.iter().zip(&counts).map(|(d, n)| json!({"scene": d.name, "rows": n})).collect::<Vec<_>>(),
        }),
    )?;
    println!(
        "predicted {} points over {} scenes",
        counts.iter().sum::<usize>(),
        scenes.len()
    );
    Ok(())
}
