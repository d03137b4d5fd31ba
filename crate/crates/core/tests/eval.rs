use proptest::prelude::*;
use suction_core::eval::{ap_from_scores, nms, precision_at, Prediction, HEADLINE_THRESHOLDS};
use suction_core::geometry::UP;
use suction_core::scoring::SuctionCandidate;
use suction_core::Vec3;

fn predictions() -> impl Strategy<Value = Vec<Prediction>> {
    prop::collection::vec((-0.2..0.2f64, -0.2..0.2f64, 0.0..0.1f64, 0u8..20), 1..120).prop_map(
        |v| {
            v.into_iter()
                .enumerate()
                .map(|(index, (x, y, z, c))| Prediction {
                    index,
                    candidate: SuctionCandidate::new(Vec3::new(x, y, z), UP).unwrap(),
                    // coarse confidences so ties occur
                    confidence: c as f64 / 19.0,
                })
                .collect()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kept_predictions_are_spread_out(preds in predictions(), radius in 0.005..0.1f64) {
        let kept = nms(&preds, radius).unwrap();
        prop_assert!(!kept.is_empty());
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                prop_assert!((a.candidate.contact - b.candidate.contact).norm() > radius);
            }
        }
        // every dropped prediction lies within radius of a kept one at least as confident
        for p in &preds {
            if kept.iter().all(|k| k.index != p.index) {
                let covered = kept.iter().any(|k| {
                    (k.candidate.contact - p.candidate.contact).norm() <= radius && k.confidence >= p.confidence
                });
                prop_assert!(covered);
            }
        }
        for w in kept.windows(2) {
            prop_assert!(w[0].confidence >= w[1].confidence);
        }
    }

    #[test]
    fn nms_ignores_monotone_rescaling(preds in predictions(), a in 0.1..10.0f64, b in -5.0..5.0f64) {
        let rescaled: Vec<Prediction> = preds
            .iter()
            .map(|p| Prediction { confidence: (a * p.confidence + b).exp(), ..*p })
            .collect();
        let idx = |v: Vec<Prediction>| v.into_iter().map(|p| p.index).collect::<Vec<_>>();
        prop_assert_eq!(idx(nms(&preds, 0.02).unwrap()), idx(nms(&rescaled, 0.02).unwrap()));
    }

    #[test]
    fn precision_falls_as_the_threshold_rises(scores in prop::collection::vec(0.0..=1.0f64, 1..60), lo in 0.0..1.0f64, d in 0.0..1.0f64) {
        prop_assert!(precision_at(&scores, lo + d) <= precision_at(&scores, lo));
        let row = ap_from_scores(&scores, 50, &HEADLINE_THRESHOLDS).unwrap();
        prop_assert!(row.ap08 <= row.ap04);
        prop_assert!((0.0..=100.0).contains(&row.ap));
        let brute = HEADLINE_THRESHOLDS
            .iter()
            .map(|&m| scores.iter().filter(|&&s| s > m).count() as f64 / scores.len() as f64)
            .sum::<f64>()
            * 25.0;
        prop_assert!((row.ap - brute).abs() < 1e-9);
    }

    #[test]
    fn raising_any_score_never_lowers_ap(scores in prop::collection::vec(0.0..=1.0f64, 1..60), i in any::<prop::sample::Index>(), bump in 0.0..1.0f64) {
        let before = ap_from_scores(&scores, 50, &HEADLINE_THRESHOLDS).unwrap();
        let mut raised = scores.clone();
        let j = i.index(raised.len());
        raised[j] = (raised[j] + bump).min(1.0);
        let after = ap_from_scores(&raised, 50, &HEADLINE_THRESHOLDS).unwrap();
        prop_assert!(after.ap >= before.ap && after.ap04 >= before.ap04 && after.ap08 >= before.ap08);
    }
}
