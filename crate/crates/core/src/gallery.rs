//! Named constructions: plain lattice combs, samples of weighted derivative
//! combs with and without monomial factors, seeded random instances, and the incommensurable-lattice
//! measure whose spectrum has quadratic variation growth while
//! `inf Σ|μ(λ)|` tends to zero.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::comb::{CombDistribution, CombMeasure, Component, MeasureComponent, Term, TrigPolynomial};
use crate::error::{Error, Result};
use crate::fourier::comb_ft;
use crate::lattice::{LatticeBasis, LatticeCoset};
use crate::multiindex::MultiIndex;
use crate::scalar::{Regime, Scalar, Vector};

fn q(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d, Regime::Exact)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `Σ_{λ ∈ T Z^d} δ_λ`.
pub fn lattice_comb(lattice: LatticeBasis) -> CombDistribution {
    let d = lattice.dim();
    let regime = lattice.regime();
    CombDistribution::dirac(LatticeCoset::new(lattice, vec![Scalar::zero(regime); d]).expect("dimensions agree"))
}

pub fn zd(dim: usize) -> CombDistribution {
    lattice_comb(LatticeBasis::integer(dim, Regime::Exact))
}

/// `(k, ω, c)`: the term `c · exp(2πi<λ,ω>) D^k δ_λ`.
pub type DerivativeTerm = (MultiIndex, Vector, Complex64);

/// `(k, m, ω, c)`: the term `c · exp(2πi<λ,ω>) λ^m D^k δ_λ`.
pub type PolynomialTerm = (MultiIndex, MultiIndex, Vector, Complex64);

/// `Σ_j Σ_{λ ∈ λ_j + L_j} Σ_{k,ω} c · exp(2πi<λ,ω>) D^k δ_λ`.
pub fn derivative_comb_form(
    dim: usize,
    components: Vec<(LatticeCoset, Vec<DerivativeTerm>)>,
) -> Result<CombDistribution> {
    polynomial_comb_form(
        dim,
        components
            .into_iter()
            .map(|(coset, terms)| {
                let terms = terms.into_iter().map(|(k, w, c)| (k, MultiIndex::zeros(dim), w, c)).collect();
                (coset, terms)
            })
            .collect(),
    )
}

/// As [`derivative_comb_form`] with monomial factors `λ^m`.
pub fn polynomial_comb_form(
    dim: usize,
    components: Vec<(LatticeCoset, Vec<PolynomialTerm>)>,
) -> Result<CombDistribution> {
    let components = components
        .into_iter()
        .map(|(coset, terms)| Component {
            coset,
            terms: terms.into_iter().map(|(k, m, omega, c)| Term::new(k, m, omega, c)).collect(),
        })
        .collect();
    CombDistribution::new(dim, components, Vec::new())
}

/// Two cosets of `Z`, derivative orders 0 and 1, one frequency each.
pub fn derivative_comb_sample() -> CombDistribution {
    let z = LatticeBasis::integer(1, Regime::Exact);
    let k0 = MultiIndex::zeros(1);
    let k1 = MultiIndex::new(vec![1]);
    derivative_comb_form(
        1,
        vec![
            (
                LatticeCoset::new(z.clone(), vec![q(0, 1)]).expect("d=1"),
                vec![(k0.clone(), vec![q(1, 2)], c(1.0, 0.0)), (k1.clone(), vec![q(1, 2)], c(0.5, 0.0))],
            ),
            (
                LatticeCoset::new(z, vec![q(1, 3)]).expect("d=1"),
                vec![(k0, vec![q(1, 5)], c(0.0, 1.0)), (k1, vec![q(1, 5)], c(-1.0, 0.0))],
            ),
        ],
    )
    .expect("valid sample")
}

/// A skew planar lattice coset carrying derivative and monomial terms.
pub fn polynomial_comb_sample() -> CombDistribution {
    let l = LatticeBasis::from_rows(vec![vec![q(2, 1), q(1, 1)], vec![q(0, 1), q(3, 1)]]).expect("nondegenerate");
    polynomial_comb_form(
        2,
        vec![(
            LatticeCoset::new(l, vec![q(1, 2), q(0, 1)]).expect("d=2"),
            vec![
                (MultiIndex::new(vec![1, 0]), MultiIndex::new(vec![0, 1]), vec![q(1, 3), q(0, 1)], c(1.0, 0.0)),
                (MultiIndex::zeros(2), MultiIndex::new(vec![2, 0]), vec![q(0, 1), q(1, 4)], c(0.5, -1.0)),
            ],
        )],
    )
    .expect("valid sample")
}

fn random_rational(rng: &mut ChaCha8Rng, num: i64, den: i64) -> Scalar {
    q(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

fn random_multiindex(rng: &mut ChaCha8Rng, dim: usize, max_order: u32) -> MultiIndex {
    let all = MultiIndex::all_up_to(dim, max_order);
    all[rng.gen_range(0..all.len())].clone()
}

/// A seeded instance: `d ∈ {1,2}`, one or two rational lattice cosets,
/// one to three terms each with `‖k‖, ‖m‖ <= 2`.
pub fn random_instance(seed: u64) -> CombDistribution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.gen_range(1..=2);
    let components = (0..rng.gen_range(1..=2))
        .map(|_| {
            let lattice = loop {
                let rows: Vec<Vector> =
                    (0..dim).map(|_| (0..dim).map(|_| random_rational(&mut rng, 3, 3)).collect()).collect();
                if let Ok(l) = LatticeBasis::from_rows(rows) {
                    if l.abs_det_f64() >= 0.25 {
                        break l;
                    }
                }
            };
            let translate = (0..dim).map(|_| random_rational(&mut rng, 3, 4)).collect();
            let coset = LatticeCoset::new(lattice, translate).expect("dimensions agree");
            let terms = (0..rng.gen_range(1..=3))
                .map(|_| {
                    let k = random_multiindex(&mut rng, dim, 2);
                    let m = random_multiindex(&mut rng, dim, 2);
                    let omega = (0..dim).map(|_| random_rational(&mut rng, 5, 6)).collect();
                    let coef = c(f64::from(rng.gen_range(-16..=16)) / 16.0, f64::from(rng.gen_range(-16..=16)) / 16.0);
                    Term::new(k, m, omega, coef)
                })
                .collect();
            Component { coset, terms }
        })
        .collect();
    CombDistribution::new(dim, components, Vec::new()).expect("dimensions agree")
}

pub const MAX_COUNTEREXAMPLE_J: u32 = 16;

fn is_squarefree(n: u64) -> bool {
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p * p) {
            return false;
        }
        p += 1;
    }
    true
}

/// Smallest squarefree integer in `(4^{j-1}, 4^j)`, so that `√q_j` lies in
/// `(2^{j-1}, 2^j)`.
pub fn counterexample_radicand(j: u32) -> u64 {
    let lo = 4u64.pow(j - 1);
    (lo + 1..4u64.pow(j)).find(|&n| is_squarefree(n)).expect("squarefree integers are dense enough")
}

fn check_j(j_max: u32) -> Result<()> {
    if !(1..=MAX_COUNTEREXAMPLE_J).contains(&j_max) {
        return Err(Error::InvalidArgument(format!("J must lie in 1..={MAX_COUNTEREXAMPLE_J}, got {j_max}")));
    }
    Ok(())
}

/// `Σ_{j <= J} j^{-2} Σ_{m,n ∈ Z} δ_{(m x_j, n 2^j + 2^{j-1})}` with
/// `x_j = √q_j`, in the float regime.
pub fn counterexample(j_max: u32) -> Result<CombMeasure> {
    check_j(j_max)?;
    let components = (1..=j_max)
        .map(|j| {
            let x = (counterexample_radicand(j) as f64).sqrt();
            let lattice =
                LatticeBasis::diagonal(vec![Scalar::float(x), Scalar::float(2f64.powi(j as i32))]).expect("positive");
            let coset = LatticeCoset::new(lattice, vec![Scalar::float(0.0), Scalar::float(2f64.powi(j as i32 - 1))])
                .expect("d=2");
            let mass = 1.0 / f64::from(j * j);
            MeasureComponent { coset, weight: TrigPolynomial::constant(c(mass, 0.0), 2, Regime::Float) }
        })
        .collect();
    CombMeasure::new(2, components)
}

/// `x_i / x_j = √(q_i q_j) / q_j` is irrational because `q_i ≠ q_j` are both
/// squarefree, so `q_i q_j` is not a perfect square.
#[derive(Debug, Clone, Serialize)]
pub struct Incommensurability {
    pub i: u32,
    pub j: u32,
    pub q_i: u64,
    pub q_j: u64,
    pub product_is_square: bool,
}

pub fn incommensurability_certificates(j_max: u32) -> Result<Vec<Incommensurability>> {
    check_j(j_max)?;
    let mut out = Vec::new();
    for i in 1..=j_max {
        for j in (i + 1)..=j_max {
            let (q_i, q_j) = (counterexample_radicand(i), counterexample_radicand(j));
            debug_assert!(is_squarefree(q_i) && is_squarefree(q_j) && q_i != q_j);
            let p = u128::from(q_i) * u128::from(q_j);
            let r = (p as f64).sqrt() as u128;
            let product_is_square = (r.saturating_sub(1)..=r + 1).any(|s| s * s == p);
            out.push(Incommensurability { i, j, q_i, q_j, product_is_square });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumBoundRow {
    pub radius: f64,
    /// `Σ_j |w_j| · #(L_j* ∩ B(0,r))`, an upper bound on `|μ̂|(B(0,r))`.
    pub upper: f64,
    /// `|μ̂|(B(0,r))` with coincident dual points merged, when the window
    /// is small enough to enumerate.
    pub exact: Option<f64>,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumBoundReport {
    pub j_max: u32,
    pub rows: Vec<SpectrumBoundRow>,
}

/// Largest number of spectrum points enumerated for the exact value.
pub const EXACT_SPECTRUM_POINTS: u64 = 200_000;

/// Compares `|μ̂_J|(B(0,r))` against `8r²`, with `μ̂_J` built by
/// [`comb_ft`].
pub fn counterexample_spectrum_bound(j_max: u32, radii: &[f64]) -> Result<SpectrumBoundReport> {
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidArgument("radii must be positive".into()));
    }
    let spectrum = comb_ft(&counterexample(j_max)?);
    let origin = vec![Scalar::float(0.0); 2];
    let rows = radii
        .iter()
        .map(|&r| {
            let mut upper = 0.0;
            let mut points = 0;
            for comp in spectrum.components() {
                let weight: f64 = comp.weight.terms().iter().map(|(a, _)| a.norm()).sum();
                let n = comp.coset.count_in_ball(&origin, r)?;
                points += n;
                upper += weight * n as f64;
            }
            let exact = if points <= EXACT_SPECTRUM_POINTS {
                let w = spectrum.evaluate_window(&origin, &Scalar::float(r))?;
                Some(w.points.iter().map(|p| p.mass().norm()).sum())
            } else {
                None
            };
            let bound = 8.0 * r * r;
            Ok(SpectrumBoundRow { radius: r, upper, exact, bound, holds: upper < bound })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumBoundReport { j_max, rows })
}

/// Resolves a gallery name: `zd` (with `dim`), `derivative-comb`,
/// `polynomial-comb`, `counterexample:J=<n>`, `random:seed=<n>`.
pub fn by_name(name: &str, dim: usize) -> Result<CombDistribution> {
    let parse_param = |prefix: &str, key: &str| -> Option<Result<u64>> {
        let rest = name.strip_prefix(prefix)?;
        let value = rest.strip_prefix(key)?;
        Some(value.parse::<u64>().map_err(|_| Error::InvalidArgument(format!("bad parameter in gallery name {name:?}"))))
    };
    match name {
        "zd" => {
            if dim == 0 {
                return Err(Error::InvalidArgument("dimension must be positive".into()));
            }
            Ok(zd(dim))
        }
        "derivative-comb" => Ok(derivative_comb_sample()),
        "polynomial-comb" => Ok(polynomial_comb_sample()),
        _ => {
            if let Some(j) = parse_param("counterexample:", "J=") {
                let j = u32::try_from(j?).map_err(|_| Error::InvalidArgument("J too large".into()))?;
                return Ok(counterexample(j)?.to_distribution());
            }
            if let Some(seed) = parse_param("random:", "seed=") {
                return Ok(random_instance(seed?));
            }
            Err(Error::InvalidArgument(format!("unknown gallery object {name:?}")))
        }
    }
}
