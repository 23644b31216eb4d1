mod common;

use masc_core::masc::{classify, GroundTruth, PointStatus};
use masc_core::metric::rescale_to_pi;
use masc_core::{compute_field, DistanceProvider, Error, Label, LocalizedKernel, MascConfig, PointCloud};
use proptest::prelude::*;

use common::compare_with_reference;

#[test]
fn matches_reference_on_random_instances() {
    let mut compared = 0;
    for seed in 0..200 {
        if compare_with_reference(seed).unwrap() {
            compared += 1;
        }
    }
    assert!(compared >= 150, "only {compared} instances produced labels");
}

fn small_cloud() -> impl Strategy<Value = Vec<(f64, f64, u32)>> {
    prop::collection::vec((0.0..5.0f64, 0.0..5.0f64, 0u32..3), 3..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn run_invariants(points in small_cloud(), theta in 0.05..0.9f64, p in 1usize..4, k in 1usize..5) {
        let rows: Vec<[f64; 2]> = points.iter().map(|&(x, y, _)| [x, y]).collect();
        let truth: Vec<Label> = points.iter().map(|p| p.2).collect();
        let cloud = PointCloud::from_rows(&rows).unwrap();
        prop_assume!(rescale_to_pi(&cloud).is_ok());
        let provider = DistanceProvider::embed(&cloud, &Default::default()).unwrap();
        let field = compute_field(&provider, &LocalizedKernel::new(8));
        let config = MascConfig { degree: 8, theta, eta_start: 0.05, eta_step: 0.1, min_component: p, neighbors: k, ..Default::default() };
        let mut oracle = GroundTruth::new(&truth);
        let retained = field.in_set(theta).unwrap().len();
        let out = match classify(&config, &provider, &field, &mut oracle) {
            Err(Error::NothingToExtend) => {
                // the full graph connects by η = π, so a query happens iff |V| >= p
                prop_assert!(retained < p);
                return Ok(());
            }
            other => other.unwrap(),
        };
        prop_assert!(retained >= p);

        // queried points carry their true label, each point asked at most once
        let mut asked: Vec<usize> = out.state.log.iter().map(|q| q.point).collect();
        for q in &out.state.log {
            prop_assert_eq!(q.label, truth[q.point]);
            prop_assert_eq!(out.state.status[q.point], PointStatus::Queried(truth[q.point]));
            prop_assert_eq!(out.labels.labels[q.point], truth[q.point]);
        }
        asked.sort_unstable();
        asked.dedup();
        prop_assert_eq!(asked.len(), out.state.log.len());
        prop_assert_eq!(oracle.calls, out.state.log.len());
        // eta never decreases in the log; steps are 1..
        prop_assert!(out.state.log.windows(2).all(|w| w[0].eta <= w[1].eta));
        prop_assert!(out.state.log.iter().enumerate().all(|(i, q)| q.step == i + 1));
        // pruned points are exactly those below the threshold
        let mask = field.threshold_mask(theta).unwrap();
        for (s, keep) in out.state.status.iter().zip(&mask) {
            prop_assert_eq!(*s == PointStatus::Pruned, !keep);
        }
        // every point has a final label drawn from the queried labels
        let seen: Vec<Label> = out.state.log.iter().map(|q| q.label).collect();
        prop_assert!(out.labels.labels.iter().all(|l| seen.contains(l)));
        // a single-class data set is labeled perfectly
        if truth.iter().all(|&l| l == truth[0]) {
            prop_assert!(out.labels.labels.iter().all(|&l| l == truth[0]));
        }
    }

    #[test]
    fn queries_never_exceed_budget(points in small_cloud(), budget in 1usize..4) {
        let rows: Vec<[f64; 2]> = points.iter().map(|&(x, y, _)| [x, y]).collect();
        let truth: Vec<Label> = points.iter().map(|p| p.2).collect();
        let cloud = PointCloud::from_rows(&rows).unwrap();
        prop_assume!(rescale_to_pi(&cloud).is_ok());
        let provider = DistanceProvider::embed(&cloud, &Default::default()).unwrap();
        let field = compute_field(&provider, &LocalizedKernel::new(8));
        let config = MascConfig { degree: 8, eta_start: 0.02, eta_step: 0.02, max_queries: Some(budget), ..Default::default() };
        let out = classify(&config, &provider, &field, &mut GroundTruth::new(&truth)).unwrap();
        prop_assert!(out.state.log.len() <= budget);
    }
}
