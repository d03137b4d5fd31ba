use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use suction_core::diffusion::{condition_features, train, ModelFile, TrainConfig, TrainSample};
use suction_core::formats::{read_labels, LABELS_FILE};
use suction_core::geometry::PointCloud;

use crate::config::{self, Flags};
use crate::dataset::require_scenes;
use crate::exit::{coded, OrExit, EMPTY_DATASET, MALFORMED_INPUT};

#[derive(clap::Args)]
pub struct Args {
    /// Annotated dataset directory.
    #[arg(long)]
    data: PathBuf,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
    /// Diffusion steps T.
    #[arg(long)]
    steps: Option<usize>,
    /// Signal scale.
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Learning rate.
    #[arg(long)]
    lr: Option<f64>,
    /// Scenes per gradient step.
    #[arg(long)]
    batch: Option<usize>,
    /// Hidden width.
    #[arg(long)]
    hidden: Option<usize>,
}

/// `model.json` → `model.loss.csv` etc.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map_or_else(|| "model".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn run(args: Args, file: &serde_json::Value) -> Result<()> {
    let flags = Flags::default()
        .set("t_train", args.steps)
        .set("scale", args.scale)
        .set("epochs", args.epochs)
        .set("seed", args.seed)
        .set("lr", args.lr)
        .set("batch_scenes", args.batch)
        .set("hidden", args.hidden);
    let cfg: TrainConfig = config::resolve(file, "train", flags.into_map())?;
    cfg.validate()?;
    let hash = config::hash(&cfg);
    let scenes = require_scenes(&args.data)?;

    let loaded: Vec<Result<TrainSample>> = scenes
        .par_iter()
        .map(|dir| {
            let rows = read_labels(&dir.path.join(LABELS_FILE)).or_exit(
                MALFORMED_INPUT,
                format!("missing or malformed labels for {}", dir.name),
            )?;
            let cloud = PointCloud::new(rows.iter().map(|r| r.point).collect())
                .with_normals(rows.iter().map(|r| r.normal).collect())?;
            Ok(TrainSample {
                features: condition_features(&cloud)?,
                scores: rows.iter().map(|r| r.score).collect(),
            })
        })
        .collect();
    let dataset: Vec<TrainSample> = loaded
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|s| !s.scores.is_empty())
        .collect();
    if dataset.is_empty() {
        return Err(coded(
            EMPTY_DATASET,
            format!("no labelled points under {}", args.data.display()),
        ));
    }
    let points: usize = dataset.iter().map(|s| s.scores.len()).sum();

    let outcome = train(&dataset, &cfg)?;
    let mut model = ModelFile::new(&outcome.params, cfg.t_train, cfg.scale);
    model.config_hash = Some(hash);
    model.config = Some(serde_json::to_value(&cfg)?);
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    config::write_json(&args.out, &model)?;

    let loss_path = sibling(&args.out, ".loss.csv");
    let mut csv = String::from("epoch,loss\n");
    for (e, l) in outcome.losses.iter().enumerate() {
        writeln!(csv, "{e},{l}")?;
    }
    std::fs::write(&loss_path, csv).with_context(|| format!("writing {}", loss_path.display()))?;
    let loss_name = loss_path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let script = format!(
        "set datafile separator ','\nset xlabel 'epoch'\nset ylabel 'loss'\nset logscale y\n\
         plot '{loss_name}' every ::1 using 1:2 with lines title 'training loss'\n"
    );
    std::fs::write(sibling(&args.out, ".loss.gp"), script)?;

    let first = outcome.losses.first().copied().unwrap_or(f64::NAN);
    let last = outcome.losses.last().copied().unwrap_or(f64::NAN);
    println!(
        "trained on {} scenes ({points} points): loss {first:.5} -> {last:.5}",
        dataset.len()
    );
    Ok(())
}
