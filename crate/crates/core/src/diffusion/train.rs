use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::rng_for;

use super::{
    cosine_schedule, forward_sample, scale_signal, ConditionFeatures, Denoiser, DenoiserParams,
    DiffusionError, DiffusionSchedule,
};

const SHUFFLE_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub t_train: usize,
    pub batch_scenes: usize,
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
    pub scale: f64,
    pub hidden: usize,
    pub embed: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            t_train: 20,
            batch_scenes: 1,
            lr: 0.05,
            epochs: 200,
            seed: 0,
            scale: 0.5,
            hidden: 64,
            embed: 16,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), DiffusionError> {
        if self.t_train == 0 {
            return Err(DiffusionError::BadT);
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) || self.batch_scenes == 0 {
            return Err(DiffusionError::BadConfig(format!(
                "lr {} batch {}",
                self.lr, self.batch_scenes
            )));
        }
        Ok(())
    }
}

/// One training scene: per-point conditioning and ground-truth scores in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSample {
    pub features: ConditionFeatures,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: DenoiserParams,
    pub schedule: DiffusionSchedule,
    /// Mean batch loss per epoch.
    pub losses: Vec<f64>,
}

/// Squared error of a denoiser's prediction of `x̄_0` from the noised signal.
pub fn denoising_loss<D: Denoiser>(
    model: &D,
    x0s: &[f64],
    t: usize,
    eps: &[f64],
    sched: &DiffusionSchedule,
    features: &ConditionFeatures,
) -> Result<f64, DiffusionError> {
    let x_t = forward_sample(x0s, t, sched, eps)?;
    let pred = model.denoise(&x_t, t, features)?;
    Ok(pred
        .iter()
        .zip(x0s)
        .map(|(p, x)| (p - x).powi(2))
        .sum::<f64>()
        / x0s.len().max(1) as f64)
}

/// Mean squared error of `params` on `target` given `x_t`, and its gradient.
pub fn loss_and_grad(
    params: &DenoiserParams,
    x_t: &[f64],
    t: usize,
    features: &ConditionFeatures,
    target: &[f64],
) -> Result<(f64, Vec<f64>), DiffusionError> {
    params.loss_and_grad(x_t, t, features, target)
}

/// Plain SGD over scene batches. Each scene draws its own step and noise
/// from a stream keyed by `(seed, epoch, scene)`.
pub fn train(dataset: &[TrainSample], cfg: &TrainConfig) -> Result<TrainOutcome, DiffusionError> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(DiffusionError::EmptyDataset);
    }
    let n_features = dataset[0].features.dim();
    for s in dataset {
        if s.features.dim() != n_features || s.features.len() != s.scores.len() {
            return Err(DiffusionError::ShapeMismatch(format!(
                "scene with {} scores, {}x{} features",
                s.scores.len(),
                s.features.len(),
                s.features.dim()
            )));
        }
    }
    let sched = cosine_schedule(cfg.t_train)?.with_scale(cfg.scale)?;
    let mut params = DenoiserParams::init(cfg.hidden, cfg.embed, n_features, cfg.seed)?;
    let targets: Vec<Vec<f64>> = dataset
        .iter()
        .map(|s| scale_signal(&s.scores, cfg.scale))
        .collect();

    let mut losses = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    for epoch in 0..cfg.epochs {
        order.sort_unstable();
        order.shuffle(&mut rng_for(cfg.seed, &[epoch as u64, SHUFFLE_STREAM]));
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for batch in order.chunks(cfg.batch_scenes) {
            let mut grad = vec![0.0; params.num_params()];
            let mut loss = 0.0;
            for &si in batch {
                let mut rng = rng_for(cfg.seed, &[epoch as u64, si as u64]);
                let t = rng.random_range(1..=cfg.t_train);
                let x0 = &targets[si];
                let eps: Vec<f64> = (0..x0.len()).map(|_| rng.sample(StandardNormal)).collect();
                let x_t = forward_sample(x0, t, &sched, &eps)?;
                let (l, g) = params.loss_and_grad(&x_t, t, &dataset[si].features, x0)?;
                loss += l;
                grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
            }
            let w = 1.0 / batch.len() as f64;
            for (p, g) in params.theta_mut().iter_mut().zip(&grad) {
                *p -= cfg.lr * w * g;
            }
            epoch_loss += loss * w;
            batches += 1;
        }
        losses.push(epoch_loss / batches as f64);
    }
    Ok(TrainOutcome {
        params,
        schedule: sched,
        losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::DenoiserParams;

    struct Oracle(Vec<f64>);

    impl Denoiser for Oracle {
        fn denoise(
            &self,
            _: &[f64],
            _: usize,
            _: &ConditionFeatures,
        ) -> Result<Vec<f64>, DiffusionError> {
            Ok(self.0.clone())
        }
    }

    fn toy(n: usize) -> ConditionFeatures {
        ConditionFeatures::from_rows(n, 2, (0..2 * n).map(|i| (i % 7) as f64 / 7.0).collect())
            .unwrap()
    }

    #[test]
    fn oracle_has_zero_loss() {
        let sched = cosine_schedule(20).unwrap();
        let x0 = scale_signal(&[0.1, 0.9, 0.4], 0.5);
        let eps = [0.3, -1.0, 2.0];
        for t in 1..=20 {
            let l = denoising_loss(&Oracle(x0.clone()), &x0, t, &eps, &sched, &toy(3)).unwrap();
            assert_eq!(l, 0.0);
        }
    }

    #[test]
    fn empty_dataset() {
        assert_eq!(
            train(&[], &TrainConfig::default()).unwrap_err(),
            DiffusionError::EmptyDataset
        );
    }

    #[test]
    fn rejects_zero_steps() {
        let cfg = TrainConfig {
            t_train: 0,
            ..Default::default()
        };
        let data = [TrainSample {
            features: toy(2),
            scores: vec![0.0, 1.0],
        }];
        assert_eq!(train(&data, &cfg).unwrap_err(), DiffusionError::BadT);
    }

    #[test]
    fn training_is_deterministic() {
        let data: Vec<TrainSample> = (0..3)
            .map(|k| TrainSample {
                features: toy(40),
                scores: (0..40).map(|i| ((i + k) % 5) as f64 / 4.0).collect(),
            })
            .collect();
        let cfg = TrainConfig {
            epochs: 3,
            hidden: 8,
            embed: 4,
            batch_scenes: 2,
            ..Default::default()
        };
        let a = train(&data, &cfg).unwrap();
        let b = train(&data, &cfg).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.losses, b.losses);
        assert_ne!(a.params, DenoiserParams::init(8, 4, 2, 0).unwrap());
    }
}
