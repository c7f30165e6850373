mod common;

use common::{cloud_of, random_points};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use regime_tagger::embed::{sliding_windows, TimeSeries, WindowMode};
use regime_tagger::features::top_persistence_lengths;
use regime_tagger::ph::{diagram_of_cloud, PersistenceDiagram, TMax};
use regime_tagger::rng::seeded_rng;
use regime_tagger::sim::{rk4_integrate, HopfField};

#[test]
fn limit_cycle_windows_have_one_dominant_bar() {
    let field = HopfField::new(0.5, 0.0);
    let traj = rk4_integrate(&field, &[0.1, 0.0], 0.0, 200.0, 0.01)
        .unwrap()
        .discard_before(100.0)
        .unwrap()
        .subsample(10)
        .unwrap();
    let series = TimeSeries::try_from(&traj).unwrap();
    let windows = sliding_windows(&series, 100, 50, WindowMode::Raw).unwrap();
    assert!(windows.len() >= 10);
    for w in &windows {
        let d = diagram_of_cloud(&w.cloud, 1, TMax::Diameter, 2.0).unwrap();
        let l = top_persistence_lengths(&d, 2, 1);
        assert!(l[0] > 5.0 * l[1], "window at {}: {l:?}", w.start_time);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn invariant_to_bar_order(seed in 0u64..10_000) {
        let mut rng = seeded_rng(seed);
        let d = diagram_of_cloud(&cloud_of(&random_points(&mut rng, 15, 2)), 1, TMax::Diameter, 2.0).unwrap();
        let mut bars = d.bars.clone();
        bars.shuffle(&mut rng);
        let shuffled = PersistenceDiagram { bars, ..d.clone() };
        prop_assert_eq!(top_persistence_lengths(&d, 3, 1), top_persistence_lengths(&shuffled, 3, 1));
        prop_assert_eq!(top_persistence_lengths(&d, 3, 0), top_persistence_lengths(&shuffled, 3, 0));
    }

    #[test]
    fn prefixes_agree_across_k(seed in 0u64..10_000, k1 in 1usize..6, k2 in 1usize..6) {
        let mut rng = seeded_rng(seed);
        let d = diagram_of_cloud(&cloud_of(&random_points(&mut rng, 15, 3)), 1, TMax::Diameter, 2.0).unwrap();
        let a = top_persistence_lengths(&d, k1, 1);
        let b = top_persistence_lengths(&d, k2, 1);
        let m = k1.min(k2);
        prop_assert_eq!(&a[..m], &b[..m]);
        prop_assert!(a.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(a.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn lengths_scale_with_the_cloud(seed in 0u64..10_000, c in 0.1f64..10.0) {
        let mut rng = seeded_rng(seed);
        let cloud = cloud_of(&random_points(&mut rng, 15, 2));
        let scaled = cloud.map_coords(|x| x * c).unwrap();
        let a = top_persistence_lengths(&diagram_of_cloud(&cloud, 1, TMax::Diameter, 2.0).unwrap(), 3, 1);
        let b = top_persistence_lengths(&diagram_of_cloud(&scaled, 1, TMax::Diameter, 2.0).unwrap(), 3, 1);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x * c - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }
}
