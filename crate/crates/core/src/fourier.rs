//! Fourier transforms of lattice combs via Poisson summation.
//!
//! Convention: `φ̂(y) = ∫ φ(x) exp(-2πi<x,y>) dx` and `<f̂, φ> = <f, φ̂>`.
//! For a modulated coset comb `μ = Σ_{λ ∈ λ0+L} exp(2πi<λ,ω>) δ_λ`,
//!
//! ```text
//! μ̂ = |det T|^{-1} exp(2πi<λ0,ω>) Σ_{u ∈ γ+L*} exp(-2πi<u,λ0>) δ_u,   γ = fold_{L*}(ω).
//! ```

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::comb::{
    leibniz_rewrite, reflect, CombDistribution, CombMeasure, Component, MeasureComponent, Term, TrigPolynomial,
    Truncation, WindowedDistribution,
};
use crate::error::{Error, Result};
use crate::fit::loglog;
use crate::lattice::{LatticeBasis, LatticeCoset};
use crate::multiindex::MultiIndex;
use crate::poly::Polynomial;
use crate::scalar::{dot, exp_2pi_i, vec_neg, vec_sub, vec_to_f64, Scalar};
use crate::schwartz::{TestFunction, MAX_DERIVATIVE_ORDER};

fn two_pi_i_pow(n: i32) -> Complex64 {
    Complex64::new(0.0, 2.0 * std::f64::consts::PI).powi(n)
}

/// `|det T|^{-1} Σ_{λ ∈ L*} δ_λ`.
pub fn dirac_comb_ft(lattice: &LatticeBasis) -> CombMeasure {
    let dual = lattice.dual();
    let d = lattice.dim();
    let coset = LatticeCoset::new(dual, vec![Scalar::zero(lattice.regime()); d]).expect("dimensions agree");
    let weight = TrigPolynomial::constant(Complex64::new(1.0 / lattice.abs_det_f64(), 0.0), d, lattice.regime());
    CombMeasure::new(d, vec![MeasureComponent { coset, weight }]).expect("dimensions agree")
}

/// Transform of a comb measure, one modulated coset at a time.
pub fn comb_ft(mu: &CombMeasure) -> CombMeasure {
    let d = mu.dim();
    let mut out = Vec::new();
    for comp in mu.components() {
        let lattice = comp.coset.lattice();
        let lambda0 = comp.coset.translate();
        let dual = lattice.dual();
        let inv_det = 1.0 / lattice.abs_det_f64();
        for (c, omega) in comp.weight.terms() {
            let gamma = dual.fold(omega).expect("dimension checked").gamma;
            let coset = LatticeCoset::new(dual.clone(), gamma).expect("dimension checked");
            let constant = c * inv_det * exp_2pi_i(&dot(lambda0, omega));
            out.push(MeasureComponent { coset, weight: TrigPolynomial::new(vec![(constant, vec_neg(lambda0))]) });
        }
    }
    CombMeasure::new(d, out).expect("dimensions agree")
}

/// Transform of a comb distribution by term rewriting.
///
/// A term `c λ^m exp(2πi<λ,ω>) D^k δ_λ` on `λ0 + L` pairs with `φ̂` as
/// `c (2πi)^{‖k‖-‖m‖} Σ_λ exp(2πi<λ,ω>) ĥ(λ)` where `h = D^m(x^k φ)`;
/// Poisson moves the sum to `γ + L*`, and `x^k D^m δ_u` is renormalized by
/// the commutation rewrite. Derivative and monomial orders exchange roles.
pub fn distribution_ft(f: &CombDistribution) -> Result<CombDistribution> {
    if !f.atoms().is_empty() {
        return Err(Error::AtomsNotTransformable);
    }
    let order = f.max_monomial_order();
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::OrderOverflow { order, max: MAX_DERIVATIVE_ORDER });
    }
    let f = f.collect();
    let mut components = Vec::new();
    for comp in f.components() {
        let lattice = comp.coset.lattice();
        let lambda0 = comp.coset.translate();
        let dual = lattice.dual();
        let inv_det = 1.0 / lattice.abs_det_f64();
        let freq = vec_neg(lambda0);
        for t in &comp.terms {
            let gamma = dual.fold(&t.omega).expect("dimension checked").gamma;
            let sign = if t.m.order() % 2 == 0 { 1.0 } else { -1.0 };
            let base = t.c
                * two_pi_i_pow(t.k.order() as i32 - t.m.order() as i32)
                * sign
                * inv_det
                * exp_2pi_i(&dot(lambda0, &t.omega));
            let terms = leibniz_rewrite(&t.k, &t.m)
                .into_iter()
                .map(|(j, coef)| Term {
                    k: t.m.checked_sub(&j).expect("j <= m"),
                    m: t.k.checked_sub(&j).expect("j <= k"),
                    omega: freq.clone(),
                    c: base * coef,
                })
                .collect();
            let coset = LatticeCoset::new(dual.clone(), gamma).expect("dimension checked");
            components.push(Component { coset, terms });
        }
    }
    CombDistribution::new(f.dim(), components, Vec::new())
}

/// Seeded Gaussian–Hermite probes: polynomial degree at most 2, width in
/// `[0.5, 2]`, center and modulation in `[-1, 1]^d`.
pub fn random_probes(dim: usize, count: usize, seed: u64) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let terms: Vec<(MultiIndex, Complex64)> = MultiIndex::all_up_to(dim, 2)
                .into_iter()
                .map(|m| (m, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                .collect();
            let width = rng.gen_range(0.5..2.0);
            let center = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let modulation = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            TestFunction::new(Polynomial::from_terms(dim, terms), width, center, modulation).expect("valid probe")
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeResult {
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub defect: f64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairingReport {
    pub probes: Vec<ProbeResult>,
    pub max_defect: f64,
    pub max_tail_bound: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl PairingReport {
    fn from_probes(probes: Vec<ProbeResult>, tolerance: f64) -> Result<PairingReport> {
        let max_defect = probes.iter().map(|p| p.defect).fold(0.0, f64::max);
        let max_tail_bound = probes.iter().map(|p| p.tail_bound).fold(0.0, f64::max);
        if max_tail_bound >= tolerance {
            return Err(Error::TailCertification { bound: max_tail_bound, tolerance, radius: f64::NAN });
        }
        Ok(PairingReport { probes, max_defect, max_tail_bound, tolerance, passed: max_defect <= tolerance })
    }
}

fn probe_result(lhs: Complex64, rhs: Complex64, tail_bound: f64) -> ProbeResult {
    ProbeResult {
        lhs_re: lhs.re,
        lhs_im: lhs.im,
        rhs_re: rhs.re,
        rhs_im: rhs.im,
        defect: (lhs - rhs).norm(),
        tail_bound,
    }
}

/// Checks `<f̂, φ> = <f, φ̂>` on every probe.
///
/// Lattice components go through [`distribution_ft`]. An atom `c D^k δ_p`
/// has a smooth transform, so its side is computed as `c ((2πix)^k φ)^(p)`
/// and compared against `c (-1)^‖k‖ D^k φ̂(p)`.
pub fn verify_pairing(
    f: &CombDistribution,
    probes: &[TestFunction],
    truncation: Truncation,
    tolerance: f64,
) -> Result<PairingReport> {
    let lattice_part = CombDistribution::new(f.dim(), f.components().to_vec(), Vec::new())?;
    let transformed = distribution_ft(&lattice_part)?;
    let mut results = Vec::with_capacity(probes.len());
    for phi in probes {
        let phi_hat = phi.ft();
        let lhs = transformed.pair(phi, truncation)?;
        let rhs = lattice_part.pair(&phi_hat, truncation)?;
        let mut lhs_value = lhs.value;
        let mut rhs_value = rhs.value;
        for atom in f.atoms() {
            let p = vec_to_f64(&atom.point);
            let moment = phi.mul_monomial(&atom.k)?.scale(two_pi_i_pow(atom.k.order() as i32)).ft();
            lhs_value += atom.c * moment.eval(&p)?;
            let sign = if atom.k.order() % 2 == 0 { 1.0 } else { -1.0 };
            rhs_value += atom.c * sign * phi_hat.eval_derivative(&atom.k, &p)?;
        }
        results.push(probe_result(lhs_value, rhs_value, lhs.tail_bound + rhs.tail_bound));
    }
    PairingReport::from_probes(results, tolerance)
}

/// Checks `<F F f, φ> = <f, φ(-·)>` on every probe.
pub fn verify_double_transform(
    f: &CombDistribution,
    probes: &[TestFunction],
    truncation: Truncation,
    tolerance: f64,
) -> Result<PairingReport> {
    let twice = distribution_ft(&distribution_ft(f)?)?;
    let mut results = Vec::with_capacity(probes.len());
    for phi in probes {
        let lhs = twice.pair(phi, truncation)?;
        let rhs = f.pair(&phi.reflect(), truncation)?;
        results.push(probe_result(lhs.value, rhs.value, lhs.tail_bound + rhs.tail_bound));
    }
    PairingReport::from_probes(results, tolerance)
}

/// `f(-x)` as a comb; exposed here because `F F f = f(-·)`.
pub fn reflection(f: &CombDistribution) -> CombDistribution {
    reflect(f)
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationGrowth {
    pub radii: Vec<f64>,
    pub variation: Vec<f64>,
    pub exponent: f64,
    pub max_ratio: f64,
}

/// Fits `V(r) = Σ_{|λ - center| <= r} |μ(λ)|` to a power of `r`; reports the
/// slope of `log V` against `log r` and `max V(r)/r^d`.
pub fn variation_growth(window: &WindowedDistribution, radii: &[f64]) -> Result<VariationGrowth> {
    if radii.len() < 3 {
        return Err(Error::InvalidArgument("variation growth needs at least 3 radii".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return Err(Error::InvalidArgument("radii must be positive and increasing".into()));
    }
    if !window.is_measure() {
        return Err(Error::NotAMeasure(window.max_order()));
    }
    if window.is_empty() {
        return Err(Error::InvalidArgument("empty window".into()));
    }
    let d = window.center.len() as i32;
    let dist: Vec<(f64, f64)> = window
        .points
        .iter()
        .map(|p| {
            let r = vec_to_f64(&vec_sub(&p.point, &window.center)).iter().map(|x| x * x).sum::<f64>().sqrt();
            (r, p.mass().norm())
        })
        .collect();
    let variation: Vec<f64> = radii
        .iter()
        .map(|&r| dist.iter().filter(|(s, _)| *s <= r * (1.0 + 1e-12)).map(|(_, m)| m).sum())
        .collect();
    if variation.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidArgument("empty window at the smallest radius".into()));
    }
    let (exponent, _) = loglog(radii, &variation);
    let max_ratio = radii.iter().zip(&variation).map(|(r, v)| v / r.powi(d)).fold(0.0, f64::max);
    Ok(VariationGrowth { radii: radii.to_vec(), variation, exponent, max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Regime;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d, Regime::Exact)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn zcomb(d: usize) -> CombDistribution {
        CombDistribution::dirac(LatticeCoset::new(LatticeBasis::integer(d, Regime::Exact), vec![q(0, 1); d]).unwrap())
    }

    fn single(coset: LatticeCoset, term: Term) -> CombDistribution {
        CombDistribution::new(coset.dim(), vec![Component { coset, terms: vec![term] }], vec![]).unwrap()
    }

    #[test]
    fn dirac_comb_transforms() {
        let z = dirac_comb_ft(&LatticeBasis::integer(2, Regime::Exact));
        assert!(z.approx_eq(&CombMeasure::try_from_distribution(&zcomb(2)).unwrap()));

        let two = LatticeBasis::diagonal(vec![q(2, 1)]).unwrap();
        let t = dirac_comb_ft(&two);
        let comp = &t.components()[0];
        assert_eq!(comp.coset.lattice().generator().get(0, 0).to_doc_string(), "1/2");
        assert_eq!(comp.weight.terms()[0].0, c(0.5, 0.0));
    }

    #[test]
    fn skew_lattice_transform_pairs() {
        let l = LatticeBasis::from_rows(vec![vec![q(2, 1), q(1, 1)], vec![q(0, 1), q(3, 1)]]).unwrap();
        let mu = CombDistribution::dirac(LatticeCoset::new(l.clone(), vec![q(0, 1), q(0, 1)]).unwrap());
        let hat = dirac_comb_ft(&l);
        assert!((hat.components()[0].weight.terms()[0].0.re - 1.0 / 6.0).abs() < 1e-15);
        let probes = random_probes(2, 4, 7);
        let report = verify_pairing(&mu, &probes, Truncation::default(), 1e-8).unwrap();
        assert!(report.passed, "{}", report.max_defect);
    }

    #[test]
    fn shifted_comb_gets_alternating_weight() {
        let coset = LatticeCoset::new(LatticeBasis::integer(1, Regime::Exact), vec![q(1, 2)]).unwrap();
        let mu = CombMeasure::dirac(coset);
        let hat = comb_ft(&mu).to_distribution();
        let w = hat.evaluate_window(&[q(0, 1)], &q(3, 1)).unwrap();
        for p in &w.points {
            let n = p.point[0].to_f64().round() as i64;
            let want = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((p.mass() - c(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn modulated_comb_moves_to_shifted_support() {
        // The pairing oracle places the spectrum of exp(2πiλ/3) on Z at Z + 1/3.
        let coset = LatticeCoset::new(LatticeBasis::integer(1, Regime::Exact), vec![q(0, 1)]).unwrap();
        let mu = single(coset, Term::mass(vec![q(1, 3)], c(1.0, 0.0)));
        let hat = distribution_ft(&mu).unwrap();
        let comp = &hat.components()[0];
        assert_eq!(comp.coset.translate()[0].to_doc_string(), "1/3");
        assert_eq!(comp.terms[0].c, c(1.0, 0.0));
        let report = verify_pairing(&mu, &random_probes(1, 6, 3), Truncation::default(), 1e-8).unwrap();
        assert!(report.passed, "{}", report.max_defect);
    }

    #[test]
    fn derivative_and_monomial_exchange() {
        let d1 = MultiIndex::new(vec![1]);
        let dz = zcomb(1).derivative(&d1).unwrap();
        let hat = distribution_ft(&dz).unwrap();
        let t = &hat.components()[0].terms[0];
        assert_eq!((t.k.order(), t.m.order()), (0, 1));
        assert!((t.c - c(0.0, 2.0 * std::f64::consts::PI)).norm() < 1e-14);

        let xz = zcomb(1).monomial_multiply(&d1).unwrap();
        let want = zcomb(1).derivative(&d1).unwrap().scale(two_pi_i_pow(-1) * -1.0);
        assert!(distribution_ft(&xz).unwrap().approx_eq(&want));

        for f in [dz, xz] {
            let report = verify_pairing(&f, &random_probes(1, 6, 11), Truncation::default(), 1e-8).unwrap();
            assert!(report.passed, "{}", report.max_defect);
        }
    }

    #[test]
    fn comb_ft_matches_distribution_ft() {
        let l = LatticeBasis::from_rows(vec![vec![q(1, 2), q(1, 3)], vec![q(0, 1), q(5, 4)]]).unwrap();
        let coset = LatticeCoset::new(l, vec![q(1, 5), q(-2, 7)]).unwrap();
        let weight = TrigPolynomial::new(vec![(c(1.0, -0.5), vec![q(1, 3), q(2, 9)]), (c(0.25, 0.0), vec![q(0, 1), q(1, 2)])]);
        let mu = CombMeasure::new(2, vec![MeasureComponent { coset, weight }]).unwrap();
        let a = comb_ft(&mu).to_distribution();
        let b = distribution_ft(&mu.to_distribution()).unwrap();
        assert!(a.approx_eq(&b));
    }

    #[test]
    fn atoms_pair_through_smooth_transform() {
        let f = CombDistribution::atom(vec![q(1, 4)], MultiIndex::new(vec![2]), c(0.5, 1.0)).unwrap();
        let report = verify_pairing(&f, &random_probes(1, 5, 1), Truncation::default(), 1e-10).unwrap();
        assert!(report.passed, "{}", report.max_defect);
        assert!(matches!(distribution_ft(&f), Err(Error::AtomsNotTransformable)));
    }

    #[test]
    fn double_transform_is_reflection() {
        let coset = LatticeCoset::new(LatticeBasis::integer(1, Regime::Exact), vec![q(1, 3)]).unwrap();
        let f = single(
            coset,
            Term::new(MultiIndex::new(vec![1]), MultiIndex::new(vec![2]), vec![q(1, 4)], c(0.3, -0.7)),
        );
        let report = verify_double_transform(&f, &random_probes(1, 5, 5), Truncation::default(), 1e-8).unwrap();
        assert!(report.passed, "{}", report.max_defect);
        let twice = distribution_ft(&distribution_ft(&f).unwrap()).unwrap();
        assert!(twice.approx_eq(&reflection(&f)));
    }

    #[test]
    fn variation_growth_examples() {
        let w = zcomb(2).evaluate_window(&[q(0, 1), q(0, 1)], &q(16, 1)).unwrap();
        let g = variation_growth(&w, &[4.0, 8.0, 16.0]).unwrap();
        assert!((g.exponent - 2.0).abs() < 0.15, "{}", g.exponent);

        let delta = CombDistribution::atom(vec![q(0, 1)], MultiIndex::zeros(1), c(1.0, 0.0)).unwrap();
        let w = delta.evaluate_window(&[q(0, 1)], &q(8, 1)).unwrap();
        assert!(variation_growth(&w, &[1.0, 2.0, 4.0]).unwrap().exponent.abs() < 1e-12);
        assert!(variation_growth(&w, &[1.0, 2.0]).is_err());
    }
}
