use proptest::prelude::*;
use suction_core::rng::rng_for;
use suction_core::scene::{
    generate_scene, read_scene, sample_object_count, write_scene, CameraSpec, SceneConfig,
};

fn small_config(lo: u32, hi: u32) -> SceneConfig {
    SceneConfig {
        n_objects: (lo, hi),
        camera: CameraSpec::TopDownOrthographic {
            resolution: (64, 64),
        },
        ..SceneConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn generation_is_deterministic(seed in any::<u64>()) {
        let cfg = small_config(1, 6);
        let a = generate_scene(&cfg, seed).unwrap();
        let b = generate_scene(&cfg, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn instances_rest_inside_the_bin(seed in any::<u64>()) {
        let cfg = small_config(1, 8);
        let scene = generate_scene(&cfg, seed).unwrap();
        prop_assert!(!scene.instances.is_empty() && scene.instances.len() <= 8);
        for inst in &scene.instances {
            let bb = inst.world_mesh().aabb();
            prop_assert!(scene.bin.contains_xy(&bb.min, &bb.max, 1e-9));
            prop_assert!(bb.min.z >= -1e-9);
            prop_assert!(inst.mass > 0.0);
        }
        let ids: Vec<u32> = scene.instances.iter().map(|i| i.id).collect();
        prop_assert_eq!(ids, (0..scene.instances.len() as u32).collect::<Vec<_>>());
    }
}

proptest! {
    #[test]
    fn object_count_stays_in_range(seed in any::<u64>(), lo in 1u32..=50, span in 0u32..50) {
        let hi = (lo + span).min(50);
        let cfg = small_config(lo, hi);
        let n = sample_object_count(&cfg, &mut rng_for(seed, &[]));
        prop_assert!((lo..=hi).contains(&n));
        prop_assert!((1..=50).contains(&n));
    }
}

#[test]
fn out_of_range_counts_are_rejected() {
    assert!(generate_scene(&small_config(0, 5), 0).is_err());
    assert!(generate_scene(&small_config(1, 51), 0).is_err());
    assert!(generate_scene(&small_config(6, 5), 0).is_err());
}

#[test]
fn scene_files_round_trip() {
    let scene = generate_scene(&small_config(3, 6), 17).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_scene(dir.path(), &scene).unwrap();
    assert_eq!(read_scene(dir.path()).unwrap(), scene);
}
