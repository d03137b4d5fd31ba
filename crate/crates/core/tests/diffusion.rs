use proptest::prelude::*;
use rand::Rng;
use suction_core::diffusion::{
    condition_features, cosine_schedule, ddim_step, sample_from, scale_signal, train,
    uniform_timesteps, unscale_signal, ConditionFeatures, Denoiser, DenoiserParams, TrainConfig,
    TrainSample,
};
use suction_core::geometry::{estimate_normals, PointCloud};
use suction_core::rng::rng_for;
use suction_core::Vec3;

fn features(rows: usize, cols: usize, seed: u64) -> ConditionFeatures {
    let mut rng = rng_for(seed, &[]);
    ConditionFeatures::from_rows(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.random::<f64>()).collect(),
    )
    .unwrap()
}

fn permutation(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut rng_for(seed, &[1]));
    p
}

fn pile(n: usize, seed: u64) -> PointCloud {
    let mut rng = rng_for(seed, &[2]);
    let pts = (0..n)
        .map(|_| {
            let (x, y): (f64, f64) = (rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
            Vec3::new(
                x,
                y,
                0.1 * (4.0 * x).sin() + 0.05 * y + rng.random_range(0.0..0.01),
            )
        })
        .collect();
    estimate_normals(&PointCloud::new(pts), 12).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schedule_is_a_decreasing_signal_level(steps in 1usize..200) {
        let s = cosine_schedule(steps).unwrap();
        prop_assert_eq!(s.steps(), steps);
        prop_assert_eq!(s.alpha_bar(0), 1.0);
        for t in 1..=steps {
            prop_assert!(s.alpha_bar(t) > 0.0 && s.alpha_bar(t) <= s.alpha_bar(t - 1));
            let b = s.beta(t);
            prop_assert!((0.0..1.0).contains(&b));
        }
    }

    #[test]
    fn scaling_round_trips_scores(xs in prop::collection::vec(0.0..=1.0f64, 1..50), scale in 0.05..=1.0f64) {
        let back = unscale_signal(&scale_signal(&xs, scale), scale);
        for (a, b) in xs.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        for v in scale_signal(&xs, scale) {
            prop_assert!(v.abs() < scale);
        }
    }

    #[test]
    fn ddim_steps_compose(
        x in prop::collection::vec(-3.0..3.0f64, 1..20),
        steps in 3usize..60,
        cuts in (0.0..1.0f64, 0.0..1.0f64),
    ) {
        let sched = cosine_schedule(steps).unwrap();
        let t = steps;
        let s = 1 + ((t - 2) as f64 * cuts.0) as usize;
        let r = ((s as f64) * cuts.1) as usize;
        let x0: Vec<f64> = x.iter().map(|v| 0.3 * v.sin()).collect();
        let direct = ddim_step(&x, &x0, t, r, &sched).unwrap();
        let mid = ddim_step(&x, &x0, t, s, &sched).unwrap();
        let two = ddim_step(&mid, &x0, s, r, &sched).unwrap();
        for (a, b) in direct.iter().zip(&two) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn denoiser_is_permutation_equivariant(n in 2usize..60, t in 0usize..=20, seed in any::<u64>()) {
        let params = DenoiserParams::init(16, 8, 5, seed).unwrap();
        let f = features(n, 5, seed);
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let perm = permutation(n, seed);
        let out = params.denoise(&x, t, &f).unwrap();
        let xp: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
        let outp = params.denoise(&xp, t, &f.permuted(&perm)).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            prop_assert_eq!(outp[k], out[i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sampling_is_permutation_equivariant(n in 2usize..40, t_inf in 1usize..=20, seed in any::<u64>()) {
        let sched = cosine_schedule(20).unwrap();
        let params = DenoiserParams::init(8, 4, 3, seed).unwrap();
        let f = features(n, 3, seed);
        let steps = uniform_timesteps(20, t_inf).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 1.3).cos()).collect();
        let perm = permutation(n, seed);
        let out = sample_from(&params, &f, &sched, &steps, x.clone()).unwrap();
        let outp = sample_from(&params, &f.permuted(&perm), &sched, &steps, perm.iter().map(|&i| x[i]).collect()).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            prop_assert_eq!(outp[k], out[i]);
        }
        prop_assert!(out.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn features_are_bounded_and_follow_the_points(n in 20usize..150, seed in any::<u64>()) {
        let cloud = pile(n, seed);
        let f = condition_features(&cloud).unwrap();
        prop_assert_eq!(f.len(), n);
        prop_assert!(f.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));

        let perm = permutation(n, seed);
        let fp = condition_features(&cloud.select(&perm)).unwrap();
        let want = f.permuted(&perm);
        for (a, b) in fp.as_slice().iter().zip(want.as_slice()) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn training_reduces_the_loss_on_a_toy_set() {
    let mut rng = rng_for(1, &[]);
    let data: Vec<TrainSample> = (0..20)
        .map(|_| {
            let n = 256;
            let f: Vec<f64> = (0..n * 8)
                .map(|i| if i % 8 == 7 { 1.0 } else { rng.random::<f64>() })
                .collect();
            let scores = (0..n).map(|i| (f[i * 8] * f[i * 8 + 2]).powi(2)).collect();
            TrainSample {
                features: ConditionFeatures::from_rows(n, 8, f).unwrap(),
                scores,
            }
        })
        .collect();
    let out = train(&data, &TrainConfig::default()).unwrap();
    let l = &out.losses;
    let tail = l[l.len() - 10..].iter().sum::<f64>() / 10.0;
    assert!(tail < 0.25 * l[0], "first {} tail {}", l[0], tail);
    assert!(out.params.is_finite());
}
