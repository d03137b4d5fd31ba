use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{Point3, Translation3, UnitQuaternion};
use proptest::prelude::*;
use suction_core::geometry::{CameraModel, KdTree, PointCloud, RayScene, TriangleMesh, UP};
use suction_core::scene::{
    generate_scene, make_parcel, render_scene, BinBox, CameraSpec, ParcelKind, ParcelShape, Scene,
    SceneConfig, SceneInstance,
};
use suction_core::scoring::{
    collision_score, seal_score, visibility_score, wrench_formula, wrench_score, GripperModel,
    SceneScorer, SuctionCandidate, SuctionCupModel, SuctionModels, WrenchModel,
};
use suction_core::{Pose, Vec3};

fn instance(id: u32, mesh: TriangleMesh, pose: Pose, mass: f64) -> SceneInstance {
    let com = (pose * Point3::from(mesh.aabb().center())).coords;
    SceneInstance {
        id,
        mesh,
        pose,
        mass,
        com,
        density: 500.0,
    }
}

fn scene(instances: Vec<SceneInstance>) -> Scene {
    Scene {
        instances,
        bin: BinBox {
            x: 0.8,
            y: 0.8,
            z: 0.4,
        },
        camera: CameraModel::top_down_orthographic((0.0, 0.0), 0.8, 0.8, 5.0, (96, 96)).unwrap(),
        seed: 0,
        friction: 0.5,
    }
}

/// A lying cylinder next to a low box: curved and stepped surfaces for the cup rim.
fn rim_fixture() -> (TriangleMesh, TriangleMesh) {
    let cyl = make_parcel(&ParcelShape {
        kind: ParcelKind::Cylindrical,
        dims: [0.08, 0.08, 0.3],
    })
    .unwrap();
    let lying = Pose::from_parts(
        Translation3::new(0.0, 0.0, 0.04),
        UnitQuaternion::from_axis_angle(&Vec3::x_axis(), FRAC_PI_2),
    );
    let cyl = cyl.transformed(&lying);
    let block = TriangleMesh::cuboid(Vec3::new(0.04, -0.1, 0.0), Vec3::new(0.12, 0.1, 0.05));
    (cyl, block)
}

fn drop_onto(rays: &RayScene, x: f64, y: f64) -> Option<Vec3> {
    rays.ray_cast(&Vec3::new(x, y, 2.0), &-UP).map(|h| h.point)
}

fn inside_cylinder(p: &Vec3, base: &Vec3, axis: &Vec3, height: f64, radius: f64) -> bool {
    let d = p - base;
    let h = d.dot(axis);
    h >= 0.0 && h <= height && (d - axis * h).norm_squared() <= radius * radius
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn seal_is_invariant_under_rigid_motions(
        x in -0.06..0.1f64,
        y in -0.08..0.08f64,
        k in 0usize..47,
        shift in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
    ) {
        let (cyl, block) = rim_fixture();
        let id = Pose::identity();
        let rays = RayScene::new([(&cyl, &id, 0), (&block, &id, 1)]);
        let cup = SuctionCupModel::default();
        let Some(contact) = drop_onto(&rays, x, y) else { return Ok(()) };
        let cand = SuctionCandidate::new(contact, UP).unwrap();
        let before = seal_score(&rays, &cand, &cup).unwrap();

        // rotations about the approach axis by a whole number of rim steps map the rim onto itself
        let rot = UnitQuaternion::from_axis_angle(&Vec3::z_axis(), TAU * k as f64 / cup.n_perimeter as f64);
        let g = Pose::from_parts(Translation3::new(shift.0, shift.1, shift.2), rot);
        let moved = RayScene::new([(&cyl, &g, 0), (&block, &g, 1)]);
        let cand_g = SuctionCandidate::new((g * Point3::from(contact)).coords, UP).unwrap();
        let after = seal_score(&moved, &cand_g, &cup).unwrap();
        prop_assert!((before - after).abs() < 1e-6, "{before} vs {after}");
    }

    #[test]
    fn seal_ignores_mass_and_all_scores_stay_in_range(
        x in -0.3..0.3f64, y in -0.3..0.3f64, m1 in 0.01..20.0f64, m2 in 0.01..20.0f64,
    ) {
        let (cyl, block) = rim_fixture();
        let light = scene(vec![instance(0, cyl.clone(), Pose::identity(), m1), instance(1, block.clone(), Pose::identity(), 1.0)]);
        let heavy = scene(vec![instance(0, cyl, Pose::identity(), m2), instance(1, block, Pose::identity(), 1.0)]);
        let a = SceneScorer::new(&light, SuctionModels::default()).unwrap();
        let b = SceneScorer::new(&heavy, SuctionModels::default()).unwrap();
        let Some(contact) = drop_onto(&a.rays, x, y) else { return Ok(()) };
        let cand = SuctionCandidate::new(contact, UP).unwrap();
        for target in [0, 1] {
            let (sa, sb) = (a.score(&cand, target), b.score(&cand, target));
            prop_assert_eq!(sa.seal, sb.seal);
            for s in [sa.seal, sa.wrench, sa.collision, sa.visibility, sa.combined] {
                prop_assert!((0.0..=1.0).contains(&s));
            }
        }
    }

    #[test]
    fn wrench_decreases_with_torque_and_tilt(
        tau in 0.0..3.0f64, dtau in 0.0..1.0f64, a in 0.0..PI, da in 0.0..1.0f64, thr in 0.1..2.0f64,
    ) {
        let base = wrench_formula(tau, a, thr);
        prop_assert!((0.0..=1.0).contains(&base));
        prop_assert!(wrench_formula(tau + dtau, a, thr) <= base);
        prop_assert!(wrench_formula(-(tau + dtau), a, thr) <= base);
        prop_assert!(wrench_formula(tau, (a + da).min(PI), thr) <= base);
    }

    #[test]
    fn wrench_drops_as_the_com_moves_away(d in 0.0..0.2f64, dd in 0.0..0.1f64, mass in 0.1..5.0f64) {
        let wm = WrenchModel::default();
        let mesh = TriangleMesh::cuboid(Vec3::repeat(-0.2), Vec3::repeat(0.2));
        let cand = SuctionCandidate::new(Vec3::new(0.0, 0.0, 0.2), UP).unwrap();
        let at = |offset: f64| {
            let mut inst = instance(0, mesh.clone(), Pose::identity(), mass);
            inst.com = Vec3::new(offset, 0.0, 0.0);
            wrench_score(&inst, &cand, &wm)
        };
        prop_assert!(at(d + dd) <= at(d));
    }

    #[test]
    fn collision_matches_brute_force(
        pts in prop::collection::vec((-0.1..0.1f64, -0.1..0.1f64, -0.05..0.15f64, 0u32..3), 1..150),
        tilt in 0.0..1.2f64,
        yaw in 0.0..TAU,
        target in 0u32..3,
    ) {
        let grip = GripperModel::default();
        let approach = Vec3::new(tilt.sin() * yaw.cos(), tilt.sin() * yaw.sin(), tilt.cos());
        let cand = SuctionCandidate::new(Vec3::zeros(), approach).unwrap();
        let points: Vec<Vec3> = pts.iter().map(|p| Vec3::new(p.0, p.1, p.2)).collect();
        let ids: Vec<u32> = pts.iter().map(|p| p.3).collect();
        let cloud = PointCloud::new(points.clone()).with_instance_ids(ids.clone()).unwrap();
        let tree = KdTree::new(&cloud.points);
        let got = collision_score(&cloud, &tree, &cand, &grip, target);

        let base = approach * grip.standoff;
        let blocked = points.iter().zip(&ids).any(|(p, &i)| {
            i != target && inside_cylinder(p, &base, &approach, grip.body_height, grip.body_radius)
        });
        prop_assert_eq!(got, if blocked { 0.0 } else { 1.0 });
    }

    #[test]
    fn occluders_never_raise_visibility(
        cx in -0.3..0.3f64, cy in -0.3..0.3f64, hx in 0.02..0.2f64, hy in 0.02..0.2f64, z in 0.06..0.3f64,
    ) {
        let target = instance(0, TriangleMesh::cuboid(Vec3::new(-0.15, -0.15, 0.0), Vec3::new(0.15, 0.15, 0.05)), Pose::identity(), 1.0);
        let lid = instance(1, TriangleMesh::cuboid(Vec3::new(cx - hx, cy - hy, z), Vec3::new(cx + hx, cy + hy, z + 0.02)), Pose::identity(), 1.0);
        let alone = scene(vec![target.clone()]);
        let covered = scene(vec![target, lid]);
        let vis = |s: &Scene| visibility_score(s, &s.camera, &render_scene(s, &s.camera), 0).unwrap();
        let (a, b) = (vis(&alone), vis(&covered));
        prop_assert!((0.0..=1.0).contains(&b));
        prop_assert!(b <= a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn generated_scene_scores_stay_in_range(seed in any::<u64>()) {
        let cfg = SceneConfig {
            n_objects: (2, 8),
            camera: CameraSpec::TopDownOrthographic { resolution: (96, 96) },
            ..SceneConfig::default()
        };
        let s = generate_scene(&cfg, seed).unwrap();
        let scorer = SceneScorer::new(&s, SuctionModels::default()).unwrap();
        let normals = suction_core::geometry::estimate_normals(&scorer.cloud, 16).unwrap().normals.unwrap();
        for i in (0..scorer.cloud.len()).step_by(37) {
            let Ok(cand) = SuctionCandidate::new(scorer.cloud.points[i], normals[i]) else { continue };
            let target = scorer.cloud.instance_id(i).unwrap();
            let sc = scorer.score(&cand, target);
            for v in [sc.seal, sc.wrench, sc.collision, sc.visibility, sc.combined] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let online = scorer.online_score(&cand);
            prop_assert!((0.0..=1.0).contains(&online));
        }
    }
}
