use latcomb::comb::Truncation;
use latcomb::fourier::{random_probes, verify_pairing};
use latcomb::gallery::{by_name, counterexample, counterexample_spectrum_bound};
use latcomb::pointset::separating_constant;
use latcomb::scalar::{Regime, Scalar};
use proptest::prelude::*;

fn window_keys(j: u32, r: f64) -> Vec<Vec<u64>> {
    let w = counterexample(j)
        .unwrap()
        .evaluate_window(&[Scalar::float(0.0), Scalar::float(0.0)], &Scalar::float(r))
        .unwrap();
    for p in &w.points {
        assert!(p.mass().re > 0.0 && p.mass().im.abs() < 1e-12, "mass {}", p.mass());
    }
    w.points_f64().into_iter().map(|p| p.iter().map(|x| x.to_bits()).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn counterexample_supports_are_nested(j in 1u32..8, r in 2.0f64..24.0) {
        let small = window_keys(j, r);
        let large = window_keys(j + 1, r);
        prop_assert!(small.len() <= large.len());
        for p in &small {
            prop_assert!(large.contains(p));
        }
    }

    #[test]
    fn spectrum_variation_is_monotone(j in 1u32..8) {
        let radii = [1.0, 2.0, 4.0, 8.0];
        let a = counterexample_spectrum_bound(j, &radii).unwrap();
        let b = counterexample_spectrum_bound(j + 1, &radii).unwrap();
        let le = |x: Option<f64>, y: Option<f64>| match (x, y) {
            (Some(x), Some(y)) => x <= y * (1.0 + 1e-12),
            _ => true,
        };
        for rows in [&a.rows, &b.rows] {
            prop_assert!(rows.windows(2).all(|w| w[0].upper <= w[1].upper));
            prop_assert!(rows.windows(2).all(|w| le(w[0].exact, w[1].exact)));
            prop_assert!(rows.iter().all(|row| le(row.exact, Some(row.upper))));
        }
        prop_assert!(a.rows[0].exact.is_some());
        for (x, y) in a.rows.iter().zip(&b.rows) {
            prop_assert!(x.upper <= y.upper);
            prop_assert!(le(x.exact, y.exact));
        }
    }
}

#[test]
fn lattice_objects_pass_the_pairing_oracle() {
    for (name, dim) in [("zd", 1), ("zd", 2), ("derivative-comb", 1), ("polynomial-comb", 2), ("random:seed=11", 1)] {
        let f = by_name(name, dim).unwrap();
        let report = verify_pairing(&f, &random_probes(f.dim(), 4, 5), Truncation::default(), 1e-8).unwrap();
        assert!(report.passed, "{name}: {}", report.max_defect);
    }
}

#[test]
fn counterexample_is_uniformly_discrete_in_window() {
    let w = counterexample(8)
        .unwrap()
        .evaluate_window(&[Scalar::float(0.0), Scalar::float(0.0)], &Scalar::float(20.0))
        .unwrap();
    assert!(separating_constant(&w.points_f64()).unwrap().eta > 0.0);
}

#[test]
fn derivative_samples_declare_their_orders() {
    let f = by_name("derivative-comb", 1).unwrap();
    assert_eq!(f.max_derivative_order(), 1);
    assert_eq!(f.max_monomial_order(), 0);
    let g = by_name("polynomial-comb", 2).unwrap();
    assert_eq!(g.max_derivative_order(), 1);
    assert_eq!(g.max_monomial_order(), 2);
    assert_eq!(Scalar::zero(Regime::Exact).regime(), Regime::Exact);
}
