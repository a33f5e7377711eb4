mod common;

use std::collections::BTreeMap;

use common::{q, rational_vec};
use latcomb::comb::{CombDistribution, Truncation, WindowedDistribution};
use latcomb::fourier::random_probes;
use latcomb::gallery::random_instance;
use latcomb::multiindex::MultiIndex;
use latcomb::scalar::{exp_2pi_i, vec_add, vec_sub, Regime, Scalar, Vector};
use num_complex::Complex64;
use proptest::prelude::*;

type Coeffs = BTreeMap<(Vec<String>, MultiIndex), Complex64>;

fn key(p: &[Scalar]) -> Vec<String> {
    p.iter().map(Scalar::to_doc_string).collect()
}

fn coeffs(w: &WindowedDistribution, shift: Option<&[Scalar]>) -> Coeffs {
    let mut out = Coeffs::new();
    for p in &w.points {
        let point = match shift {
            Some(v) => vec_sub(&p.point, v),
            None => p.point.clone(),
        };
        for (k, c) in &p.coeffs {
            out.insert((key(&point), k.clone()), *c);
        }
    }
    out
}

fn close(a: &Coeffs, b: &Coeffs, tol: f64) -> Result<(), TestCaseError> {
    let zero = Complex64::new(0.0, 0.0);
    for k in a.keys().chain(b.keys()) {
        let (x, y) = (a.get(k).unwrap_or(&zero), b.get(k).unwrap_or(&zero));
        prop_assert!((x - y).norm() <= tol * (1.0 + x.norm()), "{k:?}: {x} vs {y}");
    }
    Ok(())
}

fn window(f: &CombDistribution, center: &[Scalar], r: i64) -> WindowedDistribution {
    f.evaluate_window(center, &Scalar::from_int(r, Regime::Exact)).unwrap()
}

fn origin(d: usize) -> Vector {
    vec![Scalar::zero(Regime::Exact); d]
}

fn pair_pair() -> impl Strategy<Value = (CombDistribution, CombDistribution)> {
    (any::<u64>(), any::<u64>()).prop_filter_map("dimension mismatch", |(a, b)| {
        let (f, g) = (random_instance(a), random_instance(b));
        (f.dim() == g.dim()).then_some((f, g))
    })
}

const TOL: f64 = 1e-9;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn window_commutes_with_add((f, g) in pair_pair()) {
        let c = origin(f.dim());
        let sum = coeffs(&window(&f.add(&g).unwrap(), &c, 4), None);
        let mut parts = coeffs(&window(&f, &c, 4), None);
        for (k, v) in coeffs(&window(&g, &c, 4), None) {
            *parts.entry(k).or_default() += v;
        }
        parts.retain(|_, v| v.norm() > 0.0);
        close(&sum, &parts, TOL)?;
    }

    #[test]
    fn window_commutes_with_scale(seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let f = random_instance(seed);
        let s = Complex64::new(re, im);
        let c = origin(f.dim());
        let lhs = coeffs(&window(&f.scale(s), &c, 4), None);
        let rhs: Coeffs = coeffs(&window(&f, &c, 4), None).into_iter().map(|(k, v)| (k, v * s)).collect();
        close(&lhs, &rhs, TOL)?;
    }

    #[test]
    fn window_commutes_with_translate(seed in any::<u64>(), v in rational_vec(2)) {
        let f = random_instance(seed);
        let v = &v[..f.dim()];
        let c = origin(f.dim());
        let moved = window(&f.translate(v).unwrap(), &vec_add(&c, v), 4);
        close(&coeffs(&moved, Some(v)), &coeffs(&window(&f, &c, 4), None), TOL)?;
    }

    #[test]
    fn window_commutes_with_modulate(seed in any::<u64>(), w in rational_vec(2)) {
        let f = random_instance(seed);
        let w = &w[..f.dim()];
        let c = origin(f.dim());
        let lhs = coeffs(&window(&f.modulate(w).unwrap(), &c, 4), None);
        let base = window(&f, &c, 4);
        let mut rhs = Coeffs::new();
        for p in &base.points {
            let phase = exp_2pi_i(&latcomb::scalar::dot(w, &p.point));
            for (k, v) in &p.coeffs {
                rhs.insert((key(&p.point), k.clone()), v * phase);
            }
        }
        close(&lhs, &rhs, TOL)?;
    }

    #[test]
    fn collect_is_idempotent_and_window_neutral(seed in any::<u64>()) {
        let f = random_instance(seed);
        let once = f.collect();
        prop_assert!(once.collect().approx_eq(&once));
        let c = origin(f.dim());
        close(&coeffs(&window(&once, &c, 4), None), &coeffs(&window(&f, &c, 4), None), 0.0)?;
    }

    #[test]
    fn pair_is_linear_in_f((f, g) in pair_pair(), probe_seed in any::<u64>(), a in -2.0f64..2.0) {
        let phi = random_probes(f.dim(), 1, probe_seed).remove(0);
        let t = Truncation::default();
        let s = Complex64::new(a, 1.0);
        let lhs = f.scale(s).add(&g).unwrap().pair(&phi, t).unwrap();
        let (pf, pg) = (f.pair(&phi, t).unwrap(), g.pair(&phi, t).unwrap());
        let bound = lhs.tail_bound + s.norm() * pf.tail_bound + pg.tail_bound + 1e-9;
        prop_assert!((lhs.value - (s * pf.value + pg.value)).norm() <= bound);
    }

    #[test]
    fn pair_is_linear_in_phi(seed in any::<u64>(), probe_seed in any::<u64>(), a in -2.0f64..2.0) {
        let f = random_instance(seed);
        let mut probes = random_probes(f.dim(), 2, probe_seed);
        let psi = probes.pop().unwrap();
        let phi = probes.pop().unwrap();
        let psi = psi
            .with_width(phi.width()).unwrap()
            .with_center(phi.center().to_vec()).unwrap()
            .with_modulation(phi.modulation().to_vec()).unwrap();
        let s = Complex64::new(a, -0.5);
        let mix = phi.combine(s, &psi, Complex64::new(1.0, 0.0)).unwrap();
        let t = Truncation::default();
        let lhs = f.pair(&mix, t).unwrap();
        let (p1, p2) = (f.pair(&phi, t).unwrap(), f.pair(&psi, t).unwrap());
        let bound = lhs.tail_bound + s.norm() * p1.tail_bound + p2.tail_bound + 1e-9;
        prop_assert!((lhs.value - (s * p1.value + p2.value)).norm() <= bound);
    }

    #[test]
    fn windowed_order_matches_declared_bound(seed in any::<u64>()) {
        let f = random_instance(seed);
        let w = window(&f, &origin(f.dim()), 8);
        prop_assert_eq!(w.max_order(), f.max_derivative_order());
    }

    #[test]
    fn support_growth_is_polynomial(seed in any::<u64>()) {
        let f = random_instance(seed);
        let d = f.dim() as i32;
        let unit_ball = if d == 1 { 2.0 } else { std::f64::consts::PI };
        let c = origin(f.dim());
        for r in [2i64, 4, 8, 16] {
            let n = window(&f, &c, r).len() as f64;
            let bound: f64 = f
                .components()
                .iter()
                .map(|comp| {
                    let l = comp.coset.lattice();
                    unit_ball * (r as f64 + l.cell_diameter()).powi(d) / l.abs_det_f64()
                })
                .sum();
            prop_assert!(n <= bound, "r={r}: {n} > {bound}");
        }
    }
}

#[test]
fn translate_by_zero_is_identity() {
    let f = random_instance(7);
    let v = vec![q(0, 1); f.dim()];
    assert!(f.translate(&v).unwrap().approx_eq(&f));
}
