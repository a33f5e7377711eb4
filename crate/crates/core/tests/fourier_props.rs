mod common;

use common::{lattice, rational_vec};
use latcomb::comb::{CombMeasure, MeasureComponent, Truncation, TrigPolynomial};
use latcomb::fourier::{comb_ft, distribution_ft, random_probes, reflection, verify_double_transform, verify_pairing};
use latcomb::gallery::random_instance;
use latcomb::lattice::LatticeCoset;
use latcomb::scalar::{Regime, Scalar};
use num_complex::Complex64;
use proptest::prelude::*;

fn measure() -> impl Strategy<Value = CombMeasure> {
    (lattice(2), rational_vec(2), proptest::collection::vec((-4i32..=4, -4i32..=4, rational_vec(2)), 1..3))
        .prop_map(|(l, t, weights)| {
            let terms = weights
                .into_iter()
                .map(|(re, im, w)| (Complex64::new(re as f64 / 4.0, im as f64 / 4.0), w))
                .collect();
            let coset = LatticeCoset::new(l, t).unwrap();
            CombMeasure::new(2, vec![MeasureComponent { coset, weight: TrigPolynomial::new(terms) }]).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn pairing_oracle_holds(seed in any::<u64>(), probe_seed in any::<u64>()) {
        let f = random_instance(seed);
        let probes = random_probes(f.dim(), 3, probe_seed);
        let report = verify_pairing(&f, &probes, Truncation::Auto { tolerance: 1e-11 }, 1e-8).unwrap();
        prop_assert!(report.passed, "max defect {}", report.max_defect);
    }

    #[test]
    fn double_transform_is_reflection(seed in any::<u64>(), probe_seed in any::<u64>()) {
        let f = random_instance(seed);
        let twice = distribution_ft(&distribution_ft(&f).unwrap()).unwrap();
        prop_assert!(twice.approx_eq(&reflection(&f)));
        let probes = random_probes(f.dim(), 2, probe_seed);
        let report = verify_double_transform(&f, &probes, Truncation::Auto { tolerance: 1e-11 }, 1e-8).unwrap();
        prop_assert!(report.passed, "max defect {}", report.max_defect);
    }

    #[test]
    fn measure_transform_matches_distribution_transform(mu in measure()) {
        let direct = comb_ft(&mu).to_distribution();
        let general = distribution_ft(&mu.to_distribution()).unwrap();
        prop_assert!(direct.approx_eq(&general));
    }

    #[test]
    fn support_and_volume_exchange(l in lattice(2), t in rational_vec(2), w in rational_vec(2), re in 1i32..5) {
        let c = Complex64::new(re as f64, -1.0);
        let coset = LatticeCoset::new(l.clone(), t.clone()).unwrap();
        let mu = CombMeasure::new(2, vec![MeasureComponent {
            coset,
            weight: TrigPolynomial::new(vec![(c, w.clone())]),
        }]).unwrap();
        let out = comb_ft(&mu);
        prop_assert_eq!(out.components().len(), 1);
        let comp = &out.components()[0];
        let dual = comp.coset.lattice();
        prop_assert!(dual.same_lattice(&l.dual()));
        prop_assert_eq!(dual.det().abs(), &Scalar::one(Regime::Exact) / &l.det().abs());
        prop_assert!(comp.coset.contains(&w).unwrap());
        let terms = comp.weight.terms();
        prop_assert_eq!(terms.len(), 1);
        prop_assert!((terms[0].0.norm() - c.norm() / l.abs_det_f64()).abs() < 1e-13);
        for x in l.coordinates(&terms[0].1).unwrap() {
            prop_assert!(x.signum() >= 0 && x.cmp_total(&Scalar::one(Regime::Exact)).is_lt());
        }
    }

    #[test]
    fn transform_is_linear(seed_f in any::<u64>(), seed_g in any::<u64>(), a in -2.0f64..2.0) {
        let (f, g) = (random_instance(seed_f), random_instance(seed_g));
        prop_assume!(f.dim() == g.dim());
        let s = Complex64::new(a, 0.75);
        let lhs = distribution_ft(&f.scale(s).add(&g).unwrap()).unwrap();
        let rhs = distribution_ft(&f).unwrap().scale(s).add(&distribution_ft(&g).unwrap()).unwrap();
        prop_assert!(lhs.approx_eq(&rhs));
    }
}
