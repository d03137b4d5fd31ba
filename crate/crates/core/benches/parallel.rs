//! Each workload runs on the global rayon pool and again inside a
//! one-thread pool. Build with `--no-default-features` to get the
//! sequential code paths in both arms.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;
use suction_core::diffusion::{condition_features, Denoiser, DenoiserParams, N_FEATURES};
use suction_core::geometry::{
    estimate_normals, farthest_point_sample, rasterize_labels, PointCloud,
};
use suction_core::rng::rng_for;
use suction_core::scene::{generate_scene, scene_to_cloud, CameraSpec, SceneConfig};
use suction_core::scoring::{
    annotate_indices, sample_candidate_indices, SceneScorer, SuctionModels,
};

fn pools() -> [(&'static str, rayon::ThreadPool); 2] {
    let threads = rayon::current_num_threads();
    [
        (
            "parallel",
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap(),
        ),
        (
            "sequential",
            rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .unwrap(),
        ),
    ]
}

fn bench(c: &mut Criterion) {
    let cfg = SceneConfig {
        n_objects: (20, 20),
        camera: CameraSpec::TopDownOrthographic {
            resolution: (256, 256),
        },
        ..SceneConfig::default()
    };
    let scene = generate_scene(&cfg, 7).unwrap();
    let raw = PointCloud::new(scene_to_cloud(&scene, &scene.camera).unwrap().points);
    let cloud = estimate_normals(&raw, 16).unwrap();
    let scorer = SceneScorer::new(&scene, SuctionModels::default()).unwrap();
    let candidates = sample_candidate_indices(&scorer.cloud, 256).unwrap();
    let features = condition_features(&cloud).unwrap();
    let params = DenoiserParams::init(64, 16, N_FEATURES, 0).unwrap();
    let mut rng = rng_for(0, &[]);
    let x: Vec<f64> = (0..features.len())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();

    let mut group = c.benchmark_group("core");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new("normals", name), |b| {
            b.iter(|| pool.install(|| estimate_normals(black_box(&raw), 16).unwrap()))
        });
        group.bench_function(BenchmarkId::new("fps", name), |b| {
            b.iter(|| pool.install(|| farthest_point_sample(black_box(&raw), 1024, 0).unwrap()))
        });
        group.bench_function(BenchmarkId::new("rasterize", name), |b| {
            b.iter(|| {
                pool.install(|| rasterize_labels(black_box(&scene.raster_items()), &scene.camera))
            })
        });
        group.bench_function(BenchmarkId::new("annotate", name), |b| {
            b.iter(|| pool.install(|| annotate_indices(black_box(&scorer), &candidates)))
        });
        group.bench_function(BenchmarkId::new("denoise", name), |b| {
            b.iter(|| pool.install(|| params.denoise(black_box(&x), 10, &features).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
