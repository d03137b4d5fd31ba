//! Evaluation: NMS, online re-scoring of predicted poses, AP at score
//! thresholds and the normal-deviation baseline.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{KdTree, PointCloud};
use crate::par;
use crate::scoring::{SceneScorer, SuctionCandidate};

pub const DEFAULT_NMS_RADIUS: f64 = 0.02;
pub const HEADLINE_THRESHOLDS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];
pub const TOP_K: [usize; 2] = [1, 50];
pub const DEFAULT_BASELINE_K: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no predictions to evaluate")]
    NoPredictions,
    #[error("point cloud has no normals")]
    MissingNormals,
    #[error("invalid argument: {0}")]
    BadArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    /// Point index in the predicted cloud; breaks confidence ties.
    pub index: usize,
    pub candidate: SuctionCandidate,
    pub confidence: f64,
}

/// Greedy suppression: visit by confidence descending (ties to the lower
/// index) and keep a prediction only if it is farther than `radius` from
/// every kept one. Output is in acceptance order.
pub fn nms(preds: &[Prediction], radius: f64) -> Result<Vec<Prediction>, EvalError> {
    if !(radius > 0.0) {
        return Err(EvalError::BadArgument(format!("nms radius {radius}")));
    }
    if preds.iter().any(|p| !p.confidence.is_finite()) {
        return Err(EvalError::BadArgument("non-finite confidence".into()));
    }
    let mut order: Vec<&Prediction> = preds.iter().collect();
    order.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(a.index.cmp(&b.index))
    });
    let mut kept: Vec<Prediction> = Vec::new();
    for p in order {
        if kept
            .iter()
            .all(|q| (q.candidate.contact - p.candidate.contact).norm() > radius)
        {
            kept.push(*p);
        }
    }
    Ok(kept)
}

/// Combined score of a predicted pose, re-evaluated against the scene.
pub fn online_score(scorer: &SceneScorer<'_>, cand: &SuctionCandidate) -> f64 {
    scorer.online_score(cand)
}

/// AP figures for one scene and one `k`, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApRow {
    pub topk: usize,
    #[serde(rename = "AP")]
    pub ap: f64,
    #[serde(rename = "AP04")]
    pub ap04: f64,
    #[serde(rename = "AP08")]
    pub ap08: f64,
}

/// Fraction of `scores` strictly above `mu`.
pub fn precision_at(scores: &[f64], mu: f64) -> f64 {
    if scores.is_empty() {
        return 0.0;
    }
    scores.iter().filter(|&&s| s > mu).count() as f64 / scores.len() as f64
}

/// AP row from the online scores of the already selected top-k predictions.
/// The headline figure averages precision over `thresholds`.
pub fn ap_from_scores(scores: &[f64], topk: usize, thresholds: &[f64]) -> Result<ApRow, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::NoPredictions);
    }
    if thresholds.is_empty() {
        return Err(EvalError::BadArgument("empty threshold set".into()));
    }
    let ap = thresholds
        .iter()
        .map(|&m| precision_at(scores, m))
        .sum::<f64>()
        / thresholds.len() as f64;
    Ok(ApRow {
        topk,
        ap: 100.0 * ap,
        ap04: 100.0 * precision_at(scores, 0.4),
        ap08: 100.0 * precision_at(scores, 0.8),
    })
}

/// NMS, then AP over the best `k` survivors for every `k` in `ks`. Online
/// scores of the survivors are computed once and shared across `ks`.
pub fn evaluate_predictions(
    preds: &[Prediction],
    scorer: &SceneScorer<'_>,
    ks: &[usize],
    thresholds: &[f64],
    radius: f64,
) -> Result<Vec<ApRow>, EvalError> {
    if preds.is_empty() {
        return Err(EvalError::NoPredictions);
    }
    if ks.contains(&0) {
        return Err(EvalError::BadArgument("k must be at least 1".into()));
    }
    let kept = nms(preds, radius)?;
    let kmax = ks.iter().copied().max().unwrap_or(0).min(kept.len());
    let scores = par::map_slice(&kept[..kmax], |p| online_score(scorer, &p.candidate));
    ks.iter()
        .map(|&k| ap_from_scores(&scores[..k.min(scores.len())], k, thresholds))
        .collect()
}

/// AP for a single `k`.
pub fn average_precision(
    preds: &[Prediction],
    scorer: &SceneScorer<'_>,
    k: usize,
    thresholds: &[f64],
) -> Result<ApRow, EvalError> {
    Ok(evaluate_predictions(preds, scorer, &[k], thresholds, DEFAULT_NMS_RADIUS)?.remove(0))
}

/// Ranks every point by how little its normal deviates from those of its
/// `k` nearest neighbours.
pub fn normal_std_baseline(cloud: &PointCloud, k: usize) -> Result<Vec<Prediction>, EvalError> {
    let normals = cloud.normals.as_ref().ok_or(EvalError::MissingNormals)?;
    if k == 0 {
        return Err(EvalError::BadArgument("k must be at least 1".into()));
    }
    let tree = KdTree::new(&cloud.points);
    let preds = par::map_range(cloud.len(), |i| {
        let ni = normals[i];
        let nb = tree.knn(&cloud.points[i], k + 1);
        let others: Vec<usize> = nb.into_iter().filter(|&j| j != i).take(k).collect();
        let dev = if others.is_empty() {
            0.0
        } else {
            others
                .iter()
                .map(|&j| ni.dot(&normals[j]).clamp(-1.0, 1.0).acos())
                .sum::<f64>()
                / others.len() as f64
        };
        let confidence = 1.0 - (dev / FRAC_PI_2).clamp(0.0, 1.0);
        (i, ni, confidence)
    });
    preds
        .into_iter()
        .map(|(i, n, confidence)| {
            let candidate = SuctionCandidate {
                contact: cloud.points[i],
                approach: n,
            };
            Ok(Prediction {
                index: i,
                candidate,
                confidence,
            })
        })
        .collect()
}

/// One `(method, scene, k)` row of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRow {
    pub method: String,
    pub scene: String,
    #[serde(flatten)]
    pub row: ApRow,
}

/// Per-method means over scenes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: String,
    pub scenes: usize,
    #[serde(flatten)]
    pub row: ApRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: serde_json::Value,
    pub per_scene: Vec<SceneRow>,
    pub aggregate: Vec<AggregateRow>,
}

impl EvalReport {
    /// Builds the aggregate block as per-(method, k) means in first-seen order.
    pub fn new(config: serde_json::Value, per_scene: Vec<SceneRow>) -> Self {
        let mut keys: Vec<(String, usize)> = Vec::new();
        for r in &per_scene {
            let key = (r.method.clone(), r.row.topk);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        let aggregate = keys
            .into_iter()
            .map(|(method, topk)| {
                let rows: Vec<&ApRow> = per_scene
                    .iter()
                    .filter(|r| r.method == method && r.row.topk == topk)
                    .map(|r| &r.row)
                    .collect();
                let n = rows.len() as f64;
                let mean = |f: fn(&ApRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
                AggregateRow {
                    method,
                    scenes: rows.len(),
                    row: ApRow {
                        topk,
                        ap: mean(|r| r.ap),
                        ap04: mean(|r| r.ap04),
                        ap08: mean(|r| r.ap08),
                    },
                }
            })
            .collect();
        Self {
            config,
            per_scene,
            aggregate,
        }
    }

    pub fn aggregate_for(&self, method: &str, topk: usize) -> Option<&ApRow> {
        self.aggregate
            .iter()
            .find(|a| a.method == method && a.row.topk == topk)
            .map(|a| &a.row)
    }

    /// Aligned text table: one line per method, AP / AP0.8 / AP0.4 per k.
    pub fn table(&self) -> String {
        let mut ks: Vec<usize> = self.aggregate.iter().map(|a| a.row.topk).collect();
        ks.sort_unstable();
        ks.dedup();
        let mut methods: Vec<&str> = Vec::new();
        for a in &self.aggregate {
            if !methods.contains(&a.method.as_str()) {
                methods.push(&a.method);
            }
        }
        let width = methods.iter().map(|m| m.len()).max().unwrap_or(6).max(6);
        let mut out = format!("{:width$}", "method");
        for k in &ks {
            out += &format!(" | {:>7} {:>7} {:>7}", format!("AP@{k}"), "AP0.8", "AP0.4");
        }
        out.push('\n');
        for m in methods {
            out += &format!("{m:width$}");
            for &k in &ks {
                match self.aggregate_for(m, k) {
                    Some(r) => out += &format!(" | {:>7.2} {:>7.2} {:>7.2}", r.ap, r.ap08, r.ap04),
                    None => out += &format!(" | {:>7} {:>7} {:>7}", "-", "-", "-"),
                }
            }
            out.push('\n');
        }
        out
    }
}
