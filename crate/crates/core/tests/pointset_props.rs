use latcomb::pointset::{
    bounded_density, bounded_density_grid, check_p_discrete, counting_profile, distance, separating_constant,
    separating_constant_brute, PDiscreteness,
};
use proptest::prelude::*;

fn cloud(d: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    // quarter-integer coordinates produce exact distance ties
    proptest::collection::vec(proptest::collection::vec(-40i32..=40, d), 2..max)
        .prop_map(|mut pts| {
            pts.sort();
            pts.dedup();
            pts.into_iter().map(|p| p.into_iter().map(|x| x as f64 / 4.0).collect()).collect()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn accelerated_separation_equals_brute_force(points in cloud(2, 200)) {
        let fast = separating_constant(&points).unwrap();
        let slow = separating_constant_brute(&points).unwrap();
        prop_assert_eq!(fast.eta, slow.eta);
    }

    #[test]
    fn uniform_discreteness_is_the_h0_case(points in cloud(2, 120)) {
        let eta = separating_constant(&points).unwrap().eta;
        prop_assert!(eta > 0.0);
        let at = check_p_discrete(&points, PDiscreteness::new(eta, 0.0).unwrap()).unwrap();
        prop_assert!(at.holds);
        let above = check_p_discrete(&points, PDiscreteness::new(eta * (1.0 + 1e-9), 0.0).unwrap()).unwrap();
        prop_assert!(!above.holds);
    }

    #[test]
    fn density_1d_within_grid_bracket(points in cloud(1, 150)) {
        let density = bounded_density(&points).unwrap();
        let (lo, hi) = bounded_density_grid(&points, 0.01).unwrap();
        prop_assert!(lo <= density.value && density.value <= hi);
    }

    #[test]
    fn counting_is_monotone_and_covered_by_annuli(points in cloud(2, 200), steps in proptest::collection::vec(0.1f64..4.0, 3..7)) {
        let radii: Vec<f64> = steps.iter().scan(0.0, |acc, s| { *acc += s; Some(*acc) }).collect();
        let profile = counting_profile(&points, &radii, None).unwrap();
        prop_assert!(profile.counts.windows(2).all(|w| w[0] <= w[1]));
        for (r, n) in radii.iter().zip(&profile.counts) {
            let shells: usize = profile.annuli.iter().filter(|(s, _)| *s as f64 <= r.ceil()).map(|(_, c)| c).sum();
            prop_assert!(shells >= *n);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn density_dominates_data_centered_balls(points in cloud(2, 150)) {
        let density = bounded_density(&points).unwrap();
        let best = points
            .iter()
            .map(|x| points.iter().filter(|y| distance(x, y) <= 1.0).count())
            .max()
            .unwrap();
        prop_assert!(density.value >= best);
        let (lo, hi) = bounded_density_grid(&points, 0.1).unwrap();
        prop_assert!(lo <= density.value && density.value <= hi, "{lo} {} {hi}", density.value);
    }
}
