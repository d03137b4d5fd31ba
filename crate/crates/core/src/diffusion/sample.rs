use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::rng::rng_for;

use super::{
    ddim_step, unscale_signal, ConditionFeatures, Denoiser, DiffusionError, DiffusionSchedule,
};

const NOISE_STREAM: u64 = 0x5A3D;

/// `T_inf + 1` evenly spaced steps from `T` down to 0.
pub fn uniform_timesteps(total: usize, t_inf: usize) -> Result<Vec<usize>, DiffusionError> {
    if t_inf == 0 || t_inf > total {
        return Err(DiffusionError::BadSteps {
            t: total,
            t_prev: t_inf,
        });
    }
    Ok((0..=t_inf)
        .map(|i| (total * (t_inf - i) + t_inf / 2) / t_inf)
        .collect())
}

/// `T_inf, T_inf − 1, …, 0`: the first steps of the training schedule,
/// ignoring its length.
pub fn leading_timesteps(total: usize, t_inf: usize) -> Result<Vec<usize>, DiffusionError> {
    if t_inf == 0 || t_inf > total {
        return Err(DiffusionError::BadSteps {
            t: total,
            t_prev: t_inf,
        });
    }
    Ok((0..=t_inf).rev().collect())
}

/// DDIM sampling over a uniform sub-schedule of `t_inf` steps, from
/// seeded standard normal noise. Returns scores in `[0, 1]`.
pub fn sample<D: Denoiser>(
    model: &D,
    features: &ConditionFeatures,
    sched: &DiffusionSchedule,
    t_inf: usize,
    seed: u64,
) -> Result<Vec<f64>, DiffusionError> {
    let steps = uniform_timesteps(sched.steps(), t_inf)?;
    sample_with_timesteps(model, features, sched, &steps, seed)
}

pub fn sample_with_timesteps<D: Denoiser>(
    model: &D,
    features: &ConditionFeatures,
    sched: &DiffusionSchedule,
    timesteps: &[usize],
    seed: u64,
) -> Result<Vec<f64>, DiffusionError> {
    let mut rng = rng_for(seed, &[NOISE_STREAM]);
    let x: Vec<f64> = (0..features.len())
        .map(|_| rng.sample(StandardNormal))
        .collect();
    sample_from(model, features, sched, timesteps, x)
}

/// DDIM sampling from a given initial latent along a strictly decreasing
/// step list ending at 0.
pub fn sample_from<D: Denoiser>(
    model: &D,
    features: &ConditionFeatures,
    sched: &DiffusionSchedule,
    timesteps: &[usize],
    mut x: Vec<f64>,
) -> Result<Vec<f64>, DiffusionError> {
    if timesteps.len() < 2 || timesteps.last() != Some(&0) {
        return Err(DiffusionError::BadSteps {
            t: timesteps.first().copied().unwrap_or(0),
            t_prev: timesteps.last().copied().unwrap_or(0),
        });
    }
    if x.len() != features.len() {
        return Err(DiffusionError::ShapeMismatch(format!(
            "{} latents vs {} feature rows",
            x.len(),
            features.len()
        )));
    }
    for w in timesteps.windows(2) {
        let x0 = model.denoise(&x, w[0], features)?;
        x = ddim_step(&x, &x0, w[0], w[1], sched)?;
    }
    Ok(unscale_signal(&x, sched.scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{cosine_schedule, scale_signal, DenoiserParams};

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

    fn feats(n: usize) -> ConditionFeatures {
        ConditionFeatures::from_rows(n, 1, vec![1.0; n]).unwrap()
    }

    #[test]
    fn schedules() {
        assert_eq!(uniform_timesteps(20, 5).unwrap(), vec![20, 16, 12, 8, 4, 0]);
        assert_eq!(uniform_timesteps(20, 1).unwrap(), vec![20, 0]);
        assert_eq!(
            uniform_timesteps(20, 20).unwrap(),
            (0..=20).rev().collect::<Vec<_>>()
        );
        let u = uniform_timesteps(20, 15).unwrap();
        assert!(u.windows(2).all(|w| w[0] > w[1]) && u[0] == 20 && u.len() == 16);
        assert_eq!(leading_timesteps(20, 5).unwrap(), vec![5, 4, 3, 2, 1, 0]);
        assert!(uniform_timesteps(20, 0).is_err());
        assert!(uniform_timesteps(20, 21).is_err());
    }

    #[test]
    fn oracle_chain_recovers_scores() {
        let truth = [0.0, 0.05, 0.3, 0.77, 1.0];
        let sched = cosine_schedule(20).unwrap();
        let oracle = Oracle(scale_signal(&truth, sched.scale));
        for t_inf in [1, 5, 20] {
            let out = sample(&oracle, &feats(5), &sched, t_inf, 11).unwrap();
            for (o, g) in out.iter().zip(truth) {
                assert!((o - g).abs() < 1e-6, "{o} vs {g}");
            }
        }
    }

    #[test]
    fn deterministic_and_in_range() {
        let sched = cosine_schedule(20).unwrap();
        let p = DenoiserParams::init(8, 4, 1, 5).unwrap();
        let a = sample(&p, &feats(50), &sched, 20, 3).unwrap();
        let b = sample(&p, &feats(50), &sched, 20, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
