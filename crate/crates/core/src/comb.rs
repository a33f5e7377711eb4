//! Generalized lattice Dirac combs and their distributional extensions.
//!
//! A [`CombDistribution`] is a finite sum over lattice cosets of terms
//!
//! ```text
//! c · λ^m · exp(2πi<λ,ω>) · D^k δ_λ,    λ ∈ λ0 + L,
//! ```
//!
//! plus finitely many point atoms `c · D^k δ_p`. The measure case (`k = m = 0`)
//! is [`CombMeasure`]. Everything here is symbolic; [`WindowedDistribution`]
//! is the explicit restriction to a ball and [`CombDistribution::pair`] the
//! numerical pairing with a [`TestFunction`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::lattice::{LatticeBasis, LatticeCoset};
use crate::multiindex::MultiIndex;
use crate::scalar::{
    dot, exp_2pi_i, vec_add, vec_approx_eq, vec_cmp, vec_neg, vec_regime, vec_sub, vec_to_f64, Regime,
    Scalar, Vector, TAU_DROP, TAU_EQ,
};
use crate::schwartz::{TestFunction, MAX_DERIVATIVE_ORDER};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// One summand `c · λ^m · exp(2πi<λ,ω>) · D^k δ_λ` of a comb component.
#[derive(Debug, Clone)]
pub struct Term {
    pub k: MultiIndex,
    pub m: MultiIndex,
    pub omega: Vector,
    pub c: Complex64,
}

impl Term {
    pub fn new(k: MultiIndex, m: MultiIndex, omega: Vector, c: Complex64) -> Term {
        Term { k, m, omega, c }
    }

    /// A plain point-mass term `c · exp(2πi<λ,ω>) δ_λ`.
    pub fn mass(omega: Vector, c: Complex64) -> Term {
        let d = omega.len();
        Term { k: MultiIndex::zeros(d), m: MultiIndex::zeros(d), omega, c }
    }

    fn key_cmp(&self, other: &Term) -> Ordering {
        self.k
            .cmp(&other.k)
            .then_with(|| self.m.cmp(&other.m))
            .then_with(|| vec_cmp(&self.omega, &other.omega))
    }

    fn same_key(&self, other: &Term) -> bool {
        self.k == other.k && self.m == other.m && vec_approx_eq(&self.omega, &other.omega)
    }

    /// `c · λ^m · exp(2πi<λ,ω>)` at a support point.
    fn weight_at(&self, lambda: &[Scalar], lambda_f64: &[f64]) -> Complex64 {
        self.c * self.m.pow(lambda_f64) * exp_2pi_i(&dot(lambda, &self.omega))
    }
}

/// A point-supported term `c · D^k δ_p` outside any lattice.
#[derive(Debug, Clone)]
pub struct Atom {
    pub point: Vector,
    pub k: MultiIndex,
    pub c: Complex64,
}

/// `translate + L` together with the terms living on it.
#[derive(Debug, Clone)]
pub struct Component {
    pub coset: LatticeCoset,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone)]
pub struct CombDistribution {
    dim: usize,
    components: Vec<Component>,
    atoms: Vec<Atom>,
}

fn prunable(c: Complex64, regime: Regime) -> bool {
    match regime {
        Regime::Exact => c == ZERO,
        Regime::Float => c.norm() < TAU_DROP,
    }
}

impl CombDistribution {
    pub fn zero(dim: usize) -> CombDistribution {
        CombDistribution { dim, components: Vec::new(), atoms: Vec::new() }
    }

    /// Builds and canonicalizes.
    pub fn new(dim: usize, components: Vec<Component>, atoms: Vec<Atom>) -> Result<CombDistribution> {
        for comp in &components {
            check_dim(dim, comp.coset.dim())?;
            for t in &comp.terms {
                check_dim(dim, t.k.dim())?;
                check_dim(dim, t.m.dim())?;
                check_dim(dim, t.omega.len())?;
            }
        }
        for a in &atoms {
            check_dim(dim, a.point.len())?;
            check_dim(dim, a.k.dim())?;
        }
        Ok(CombDistribution { dim, components, atoms }.collect())
    }

    /// The Dirac comb `Σ_{λ ∈ coset} δ_λ`.
    pub fn dirac(coset: LatticeCoset) -> CombDistribution {
        let d = coset.dim();
        let regime = coset.regime();
        let term = Term::mass(vec![Scalar::zero(regime); d], Complex64::new(1.0, 0.0));
        CombDistribution::new(d, vec![Component { coset, terms: vec![term] }], Vec::new())
            .expect("dimensions agree")
    }

    /// A single atom `c · D^k δ_p`.
    pub fn atom(point: Vector, k: MultiIndex, c: Complex64) -> Result<CombDistribution> {
        let d = point.len();
        CombDistribution::new(d, Vec::new(), vec![Atom { point, k, c }])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn regime(&self) -> Regime {
        let mut r = Regime::Exact;
        for comp in &self.components {
            r = r.join(comp.coset.regime());
            for t in &comp.terms {
                r = r.join(vec_regime(&t.omega));
            }
        }
        for a in &self.atoms {
            r = r.join(vec_regime(&a.point));
        }
        r
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty() && self.atoms.is_empty()
    }

    /// `K = max ‖k‖` over all terms.
    pub fn max_derivative_order(&self) -> u32 {
        self.all_terms()
            .map(|t| t.k.order())
            .chain(self.atoms.iter().map(|a| a.k.order()))
            .max()
            .unwrap_or(0)
    }

    /// `M = max ‖m‖` over all terms.
    pub fn max_monomial_order(&self) -> u32 {
        self.all_terms().map(|t| t.m.order()).max().unwrap_or(0)
    }

    fn all_terms(&self) -> impl Iterator<Item = &Term> {
        self.components.iter().flat_map(|c| c.terms.iter())
    }

    pub fn is_measure(&self) -> bool {
        self.max_derivative_order() == 0 && self.max_monomial_order() == 0
    }

    fn map_components(&self, f: impl Fn(&Component) -> Component) -> CombDistribution {
        CombDistribution {
            dim: self.dim,
            components: self.components.iter().map(f).collect(),
            atoms: self.atoms.clone(),
        }
    }

    pub fn add(&self, other: &CombDistribution) -> Result<CombDistribution> {
        check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        out.components.extend(other.components.iter().cloned());
        out.atoms.extend(other.atoms.iter().cloned());
        Ok(out.collect())
    }

    pub fn scale(&self, s: Complex64) -> CombDistribution {
        let mut out = self.map_components(|comp| Component {
            coset: comp.coset.clone(),
            terms: comp.terms.iter().map(|t| Term { c: t.c * s, ..t.clone() }).collect(),
        });
        for a in &mut out.atoms {
            a.c *= s;
        }
        out.collect()
    }

    /// Pushes the support forward by `v`: `λ ↦ λ + v`. Monomials are
    /// re-expanded in the new variable and phases absorb `exp(-2πi<v,ω>)`.
    pub fn translate(&self, v: &[Scalar]) -> Result<CombDistribution> {
        check_dim(self.dim, v.len())?;
        let vf = vec_to_f64(v);
        let neg_v: Vec<f64> = vf.iter().map(|x| -x).collect();
        let mut out = self.map_components(|comp| {
            let coset = LatticeCoset::new(comp.coset.lattice().clone(), vec_add(comp.coset.translate(), v))
                .expect("dimension checked");
            let mut terms = Vec::new();
            for t in &comp.terms {
                let phase = exp_2pi_i(&-dot(v, &t.omega));
                // (λ' - v)^m = Σ_{j<=m} C(m,j) λ'^j (-v)^{m-j}
                for j in t.m.below() {
                    let rest = t.m.checked_sub(&j).expect("j <= m");
                    let coef = t.m.binomial(&j) * rest.pow(&neg_v);
                    if coef != 0.0 {
                        terms.push(Term { k: t.k.clone(), m: j, omega: t.omega.clone(), c: t.c * phase * coef });
                    }
                }
            }
            Component { coset, terms }
        });
        for a in &mut out.atoms {
            a.point = vec_add(&a.point, v);
        }
        Ok(out.collect())
    }

    /// Multiplies every coefficient `p_k(λ)` by `exp(2πi<λ,ω0>)`. For measures
    /// this is multiplication by the character; with derivative terms it acts
    /// on the coefficients only.
    pub fn modulate(&self, omega0: &[Scalar]) -> Result<CombDistribution> {
        check_dim(self.dim, omega0.len())?;
        let mut out = self.map_components(|comp| Component {
            coset: comp.coset.clone(),
            terms: comp
                .terms
                .iter()
                .map(|t| Term { omega: vec_add(&t.omega, omega0), ..t.clone() })
                .collect(),
        });
        for a in &mut out.atoms {
            a.c *= exp_2pi_i(&dot(&a.point, omega0));
        }
        Ok(out.collect())
    }

    /// `D^{k0} f`.
    pub fn derivative(&self, k0: &MultiIndex) -> Result<CombDistribution> {
        check_dim(self.dim, k0.dim())?;
        let order = self.max_derivative_order() + k0.order();
        if order > MAX_DERIVATIVE_ORDER {
            return Err(Error::OrderOverflow { order, max: MAX_DERIVATIVE_ORDER });
        }
        let mut out = self.map_components(|comp| Component {
            coset: comp.coset.clone(),
            terms: comp.terms.iter().map(|t| Term { k: t.k.add(k0), ..t.clone() }).collect(),
        });
        for a in &mut out.atoms {
            a.k = a.k.add(k0);
        }
        Ok(out.collect())
    }

    /// The distributional product `x^{a} · f`.
    ///
    /// Pairing against `φ` gives `(-1)^‖k‖ D^k(x^a φ)(λ)`; expanding by
    /// Leibniz and re-reading each summand as a derivative of `δ_λ` yields
    ///
    /// ```text
    /// x^a D^k δ_λ = Σ_{j <= min(a,k)} (-1)^‖j‖ C(k,j) a!/(a-j)! λ^{a-j} D^{k-j} δ_λ.
    /// ```
    pub fn monomial_multiply(&self, a: &MultiIndex) -> Result<CombDistribution> {
        check_dim(self.dim, a.dim())?;
        let mut out = self.map_components(|comp| Component {
            coset: comp.coset.clone(),
            terms: comp
                .terms
                .iter()
                .flat_map(|t| {
                    leibniz_rewrite(a, &t.k).into_iter().map(move |(j, coef)| Term {
                        k: t.k.checked_sub(&j).expect("j <= k"),
                        m: t.m.add(&a.checked_sub(&j).expect("j <= a")),
                        omega: t.omega.clone(),
                        c: t.c * coef,
                    })
                })
                .collect(),
        });
        out.atoms = self
            .atoms
            .iter()
            .flat_map(|at| {
                let p = vec_to_f64(&at.point);
                leibniz_rewrite(a, &at.k).into_iter().map(move |(j, coef)| {
                    let power = a.checked_sub(&j).expect("j <= a").pow(&p);
                    Atom { point: at.point.clone(), k: at.k.checked_sub(&j).expect("j <= k"), c: at.c * coef * power }
                })
            })
            .collect();
        Ok(out.collect())
    }

    /// Canonical form: translates reduced into `T[0,1)^d`, frequencies folded
    /// into the fundamental domain of the dual lattice, cosets of equal point
    /// sets merged, terms sorted by `(k, m, γ)` with equal keys summed and
    /// zero terms dropped. Idempotent.
    pub fn collect(&self) -> CombDistribution {
        let regime = self.regime();
        // group components by coset equality
        let mut groups: Vec<Vec<&Component>> = Vec::new();
        for comp in &self.components {
            match groups.iter_mut().find(|g| g[0].coset.same_coset(&comp.coset)) {
                Some(g) => g.push(comp),
                None => groups.push(vec![comp]),
            }
        }
        let mut components: Vec<Component> = groups
            .into_iter()
            .filter_map(|group| {
                let rep = group
                    .iter()
                    .map(|c| c.coset.lattice())
                    .min_by(|a, b| generator_cmp(a, b))
                    .expect("nonempty group")
                    .clone();
                let coset = group[0].coset.with_basis(rep.clone());
                let dual = rep.dual();
                let mut terms: Vec<Term> = group
                    .iter()
                    .flat_map(|c| c.terms.iter())
                    .map(|t| {
                        let folded = dual.fold(&t.omega).expect("dimension checked");
                        let shift = vec_sub(&t.omega, &folded.gamma);
                        let phase = exp_2pi_i(&dot(coset.translate(), &shift));
                        Term { k: t.k.clone(), m: t.m.clone(), omega: folded.gamma, c: t.c * phase }
                    })
                    .collect();
                terms.sort_by(Term::key_cmp);
                let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
                for t in terms {
                    match merged.last_mut() {
                        Some(last) if last.same_key(&t) => last.c += t.c,
                        _ => merged.push(t),
                    }
                }
                merged.retain(|t| !prunable(t.c, regime));
                (!merged.is_empty()).then_some(Component { coset, terms: merged })
            })
            .collect();
        components.sort_by(|a, b| {
            generator_cmp(a.coset.lattice(), b.coset.lattice())
                .then_with(|| vec_cmp(a.coset.translate(), b.coset.translate()))
        });

        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| vec_cmp(&a.point, &b.point).then_with(|| a.k.cmp(&b.k)));
        let mut merged_atoms: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged_atoms.last_mut() {
                Some(last) if last.k == a.k && vec_approx_eq(&last.point, &a.point) => last.c += a.c,
                _ => merged_atoms.push(a),
            }
        }
        merged_atoms.retain(|a| !prunable(a.c, regime));
        CombDistribution { dim: self.dim, components, atoms: merged_atoms }
    }

    /// Equality up to `TAU_EQ` relative to the largest coefficient: the
    /// collected difference must be negligible. Cosets given by different
    /// bases of the same lattice compare equal.
    pub fn approx_eq(&self, other: &CombDistribution) -> bool {
        if self.dim != other.dim {
            return false;
        }
        let scale = self.max_coefficient().max(other.max_coefficient()).max(1.0);
        match self.add(&other.scale(Complex64::new(-1.0, 0.0))) {
            Ok(diff) => diff.without_residue(scale).is_zero(),
            Err(_) => false,
        }
    }

    fn max_coefficient(&self) -> f64 {
        let terms = self.components.iter().flat_map(|c| c.terms.iter().map(|t| t.c.norm()));
        terms.chain(self.atoms.iter().map(|a| a.c.norm())).fold(0.0, f64::max)
    }

    fn without_residue(mut self, scale: f64) -> CombDistribution {
        let floor = TAU_EQ * scale;
        for comp in &mut self.components {
            comp.terms.retain(|t| t.c.norm() > floor);
        }
        self.components.retain(|c| !c.terms.is_empty());
        self.atoms.retain(|a| a.c.norm() > floor);
        self
    }

    /// Explicit restriction to the closed ball `B(center, radius)`.
    pub fn evaluate_window(&self, center: &[Scalar], radius: &Scalar) -> Result<WindowedDistribution> {
        check_dim(self.dim, center.len())?;
        if radius.signum() < 0 {
            return Err(Error::InvalidArgument("negative radius".into()));
        }
        let regime = self.regime().join(vec_regime(center)).join(radius.regime());
        let mut entries: Vec<(Vector, BTreeMap<MultiIndex, Complex64>)> = Vec::new();
        for comp in &self.components {
            for lambda in comp.coset.enumerate(center, radius)? {
                let lf = vec_to_f64(&lambda);
                let mut coeffs: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
                for t in &comp.terms {
                    *coeffs.entry(t.k.clone()).or_insert(ZERO) += t.weight_at(&lambda, &lf);
                }
                entries.push((lambda, coeffs));
            }
        }
        let r2 = radius.to_f64().powi(2) * (1.0 + 2.0 * TAU_EQ);
        for a in &self.atoms {
            let d2: f64 = vec_sub(&a.point, center).iter().map(|x| x.to_f64().powi(2)).sum();
            if d2 <= r2 {
                entries.push((a.point.clone(), BTreeMap::from([(a.k.clone(), a.c)])));
            }
        }
        let mut points = merge_points(entries, regime);
        for p in &mut points {
            p.coeffs.retain(|_, c| c.norm() >= TAU_DROP);
        }
        points.retain(|p| !p.coeffs.is_empty());
        Ok(WindowedDistribution { center: center.to_vec(), radius: radius.clone(), points })
    }

    /// `⟨f, φ⟩ = Σ_λ Σ_k p_k(λ) (-1)^‖k‖ D^kφ(λ)`, truncated to a ball around
    /// the center of `φ`, with a certified bound on the omitted tail.
    pub fn pair(&self, phi: &TestFunction, truncation: Truncation) -> Result<PairResult> {
        check_dim(self.dim, phi.dim())?;
        let scale = 1.0 / phi.width().sqrt();
        let radius = match truncation {
            Truncation::Radius(r) => {
                if !(r > 0.0) {
                    return Err(Error::InvalidArgument("truncation radius must be positive".into()));
                }
                r
            }
            Truncation::Auto { tolerance } => {
                let mut r = 2.0 * scale;
                let max_r = 64.0 * scale;
                loop {
                    let bound = self.tail_bound(phi, r)?;
                    if bound < tolerance {
                        break r;
                    }
                    if r >= max_r {
                        return Err(Error::TailCertification { bound, tolerance, radius: r });
                    }
                    r = (r + 0.5 * scale).min(max_r);
                }
            }
        };
        let tail_bound = self.tail_bound(phi, radius)?;
        let center: Vector = phi.center().iter().map(|&x| Scalar::float(x)).collect();
        let window = self.lattice_part().evaluate_window(&center, &Scalar::float(radius))?;
        let mut derivs: HashMap<MultiIndex, TestFunction> = HashMap::new();
        let mut value = ZERO;
        let mut add_point = |point: &[f64], k: &MultiIndex, c: Complex64| -> Result<()> {
            if !derivs.contains_key(k) {
                derivs.insert(k.clone(), phi.derivative(k)?);
            }
            let sign = if k.order().is_multiple_of(2) { 1.0 } else { -1.0 };
            value += c * sign * derivs[k].eval_unchecked(point);
            Ok(())
        };
        for p in &window.points {
            let pf = vec_to_f64(&p.point);
            for (k, c) in &p.coeffs {
                add_point(&pf, k, *c)?;
            }
        }
        for a in &self.atoms {
            add_point(&vec_to_f64(&a.point), &a.k, a.c)?;
        }
        Ok(PairResult { value, tail_bound, radius })
    }

    fn lattice_part(&self) -> CombDistribution {
        CombDistribution { dim: self.dim, components: self.components.clone(), atoms: Vec::new() }
    }

    /// Bound on `Σ |p_k(λ)| |D^kφ(λ)|` over support points with
    /// `|λ - x0| > radius`, summed shell by shell: a shell `(s, s+1]` holds
    /// at most `vol B(s + 1 + diam) / |det T|` points of a coset.
    pub fn tail_bound(&self, phi: &TestFunction, radius: f64) -> Result<f64> {
        let d = self.dim as i32;
        let x0_norm = phi.center().iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut envelopes: HashMap<MultiIndex, crate::schwartz::Envelope> = HashMap::new();
        let mut total = 0.0;
        for comp in &self.components {
            let lattice = comp.coset.lattice();
            let diam = lattice.cell_diameter();
            let det = lattice.abs_det_f64();
            for t in &comp.terms {
                if !envelopes.contains_key(&t.k) {
                    envelopes.insert(t.k.clone(), phi.derivative(&t.k)?.envelope());
                }
                let env = &envelopes[&t.k];
                let mut s = radius;
                let mut prev = f64::INFINITY;
                for step in 0.. {
                    let count = unit_ball_volume(self.dim) * (s + 1.0 + diam).powi(d) / det;
                    let term = t.c.norm()
                        * count
                        * (x0_norm + s + 1.0).powi(t.m.order() as i32)
                        * env.shell_bound(s);
                    total += term;
                    if step > 2 && term <= 0.5 * prev && (term < 1e-40 || term < 1e-30 * total) {
                        // remaining shells shrink at least geometrically with ratio 1/2
                        total += term;
                        break;
                    }
                    prev = term;
                    s += 1.0;
                    if step > 100_000 {
                        return Ok(f64::INFINITY);
                    }
                }
            }
        }
        Ok(total)
    }
}

/// Coefficient factors of `x^a D^k δ = Σ_j coef_j λ^{a-j} D^{k-j} δ`.
pub(crate) fn leibniz_rewrite(a: &MultiIndex, k: &MultiIndex) -> Vec<(MultiIndex, f64)> {
    a.min(k)
        .below()
        .into_iter()
        .map(|j| {
            let sign = if j.order() % 2 == 0 { 1.0 } else { -1.0 };
            let coef = sign * k.binomial(&j) * a.falling(&j);
            (j, coef)
        })
        .filter(|(_, c)| *c != 0.0)
        .collect()
}

fn generator_cmp(a: &LatticeBasis, b: &LatticeBasis) -> Ordering {
    for (ra, rb) in a.generator().rows().iter().zip(b.generator().rows()) {
        match vec_cmp(ra, rb) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    Ordering::Equal
}

pub(crate) fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

fn merge_points(
    mut entries: Vec<(Vector, BTreeMap<MultiIndex, Complex64>)>,
    regime: Regime,
) -> Vec<WindowPoint> {
    entries.sort_by(|a, b| vec_cmp(&a.0, &b.0));
    let mut out: Vec<WindowPoint> = Vec::with_capacity(entries.len());
    match regime {
        Regime::Exact => {
            for (point, coeffs) in entries {
                match out.last_mut() {
                    Some(last) if vec_approx_eq(&last.point, &point) => last.absorb(coeffs),
                    _ => out.push(WindowPoint { point, coeffs }),
                }
            }
        }
        Regime::Float => {
            // Near-equal points may not be adjacent in lexicographic order;
            // scan the run of points whose first coordinate is close.
            let firsts: Vec<f64> = entries.iter().map(|e| e.0[0].to_f64()).collect();
            let mut taken = vec![false; entries.len()];
            let mut entries: Vec<Option<(Vector, BTreeMap<MultiIndex, Complex64>)>> =
                entries.into_iter().map(Some).collect();
            for i in 0..entries.len() {
                if taken[i] {
                    continue;
                }
                let (point, coeffs) = entries[i].take().expect("not taken");
                let mut wp = WindowPoint { point, coeffs };
                let tol = TAU_EQ * firsts[i].abs().max(1.0);
                let mut j = i + 1;
                while j < firsts.len() && firsts[j] - firsts[i] <= 2.0 * tol {
                    if !taken[j] && vec_approx_eq(&wp.point, &entries[j].as_ref().expect("not taken").0) {
                        taken[j] = true;
                        let (_, c) = entries[j].take().expect("not taken");
                        wp.absorb(c);
                    }
                    j += 1;
                }
                out.push(wp);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Fixed window radius around the test function's center.
    Radius(f64),
    /// Smallest radius (in steps of `0.5/sqrt(a)`) whose tail bound is below
    /// `tolerance`.
    Auto { tolerance: f64 },
}

impl Default for Truncation {
    fn default() -> Truncation {
        Truncation::Auto { tolerance: 1e-11 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairResult {
    pub value: Complex64,
    pub tail_bound: f64,
    pub radius: f64,
}

/// A support point and its coefficient map `k ↦ p_k(λ)`.
#[derive(Debug, Clone)]
pub struct WindowPoint {
    pub point: Vector,
    pub coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl WindowPoint {
    fn absorb(&mut self, coeffs: BTreeMap<MultiIndex, Complex64>) {
        for (k, c) in coeffs {
            *self.coeffs.entry(k).or_insert(ZERO) += c;
        }
    }

    pub fn mass(&self) -> Complex64 {
        self.coeffs.get(&MultiIndex::zeros(self.point.len())).copied().unwrap_or(ZERO)
    }

    pub fn point_f64(&self) -> Vec<f64> {
        vec_to_f64(&self.point)
    }
}

/// A distribution restricted to a closed ball: distinct points with nonempty
/// coefficient maps.
#[derive(Debug, Clone)]
pub struct WindowedDistribution {
    pub center: Vector,
    pub radius: Scalar,
    pub points: Vec<WindowPoint>,
}

impl WindowedDistribution {
    /// Builds a measure window from explicit `(point, mass)` pairs.
    pub fn from_masses(center: Vector, radius: Scalar, masses: Vec<(Vector, Complex64)>) -> WindowedDistribution {
        let points = masses
            .into_iter()
            .filter(|(_, c)| c.norm() >= TAU_DROP)
            .map(|(point, c)| {
                let k = MultiIndex::zeros(point.len());
                WindowPoint { point, coeffs: BTreeMap::from([(k, c)]) }
            })
            .collect();
        WindowedDistribution { center, radius, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_order(&self) -> u32 {
        self.points
            .iter()
            .flat_map(|p| p.coeffs.keys().map(MultiIndex::order))
            .max()
            .unwrap_or(0)
    }

    pub fn is_measure(&self) -> bool {
        self.max_order() == 0
    }

    pub fn points_f64(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(WindowPoint::point_f64).collect()
    }

    /// Coefficient `p_k` at an exact support point, if present.
    pub fn coefficient(&self, point: &[Scalar], k: &MultiIndex) -> Option<Complex64> {
        self.points
            .iter()
            .find(|p| vec_approx_eq(&p.point, point))
            .and_then(|p| p.coeffs.get(k).copied())
    }

    /// Pointwise comparison of two windows at `tol` (absolute on
    /// coefficients; missing entries count as zero).
    pub fn approx_eq(&self, other: &WindowedDistribution, tol: f64) -> bool {
        let lookup = |w: &WindowedDistribution, p: &WindowPoint| -> bool {
            match w.points.iter().find(|q| vec_approx_eq(&q.point, &p.point)) {
                Some(q) => {
                    let keys: std::collections::BTreeSet<&MultiIndex> =
                        p.coeffs.keys().chain(q.coeffs.keys()).collect();
                    keys.into_iter().all(|k| {
                        let a = p.coeffs.get(k).copied().unwrap_or(ZERO);
                        let b = q.coeffs.get(k).copied().unwrap_or(ZERO);
                        (a - b).norm() <= tol
                    })
                }
                None => p.coeffs.values().all(|c| c.norm() <= tol),
            }
        };
        self.points.iter().all(|p| lookup(other, p)) && other.points.iter().all(|p| lookup(self, p))
    }
}

/// A finite trigonometric polynomial `P(λ) = Σ_w c_w exp(2πi<λ,ω_w>)`.
#[derive(Debug, Clone)]
pub struct TrigPolynomial {
    terms: Vec<(Complex64, Vector)>,
}

impl TrigPolynomial {
    /// Merges equal frequencies and drops zero coefficients.
    pub fn new(terms: Vec<(Complex64, Vector)>) -> TrigPolynomial {
        let mut terms = terms;
        terms.sort_by(|a, b| vec_cmp(&a.1, &b.1));
        let mut merged: Vec<(Complex64, Vector)> = Vec::with_capacity(terms.len());
        for (c, w) in terms {
            match merged.last_mut() {
                Some(last) if vec_approx_eq(&last.1, &w) => last.0 += c,
                _ => merged.push((c, w)),
            }
        }
        merged.retain(|(c, _)| *c != ZERO);
        TrigPolynomial { terms: merged }
    }

    pub fn constant(c: Complex64, dim: usize, regime: Regime) -> TrigPolynomial {
        TrigPolynomial::new(vec![(c, vec![Scalar::zero(regime); dim])])
    }

    pub fn terms(&self) -> &[(Complex64, Vector)] {
        &self.terms
    }

    pub fn eval(&self, lambda: &[Scalar]) -> Complex64 {
        self.terms.iter().map(|(c, w)| c * exp_2pi_i(&dot(lambda, w))).sum()
    }
}

#[derive(Debug, Clone)]
pub struct MeasureComponent {
    pub coset: LatticeCoset,
    pub weight: TrigPolynomial,
}

/// `μ = Σ_j Σ_{λ ∈ λ_j + L_j} P_j(λ) δ_λ`.
#[derive(Debug, Clone)]
pub struct CombMeasure {
    dim: usize,
    components: Vec<MeasureComponent>,
}

impl CombMeasure {
    /// Builds in canonical form.
    pub fn new(dim: usize, components: Vec<MeasureComponent>) -> Result<CombMeasure> {
        let dist = CombMeasure { dim, components }.to_distribution_raw()?;
        CombMeasure::try_from_distribution(&dist)
    }

    pub fn dirac(coset: LatticeCoset) -> CombMeasure {
        CombMeasure::try_from_distribution(&CombDistribution::dirac(coset)).expect("measure")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[MeasureComponent] {
        &self.components
    }

    fn to_distribution_raw(&self) -> Result<CombDistribution> {
        let d = self.dim;
        let components = self
            .components
            .iter()
            .map(|mc| Component {
                coset: mc.coset.clone(),
                terms: mc.weight.terms.iter().map(|(c, w)| Term::mass(w.clone(), *c)).collect(),
            })
            .collect();
        CombDistribution::new(d, components, Vec::new())
    }

    pub fn to_distribution(&self) -> CombDistribution {
        self.to_distribution_raw().expect("validated at construction")
    }

    pub fn try_from_distribution(f: &CombDistribution) -> Result<CombMeasure> {
        if !f.atoms.is_empty() {
            return Err(Error::InvalidArgument("measure components cannot carry atoms".into()));
        }
        if f.max_derivative_order() > 0 {
            return Err(Error::NotAMeasure(f.max_derivative_order()));
        }
        if f.max_monomial_order() > 0 {
            return Err(Error::InvalidArgument("monomial weights are not trigonometric polynomials".into()));
        }
        let f = f.collect();
        let components = f
            .components
            .iter()
            .map(|c| MeasureComponent {
                coset: c.coset.clone(),
                weight: TrigPolynomial { terms: c.terms.iter().map(|t| (t.c, t.omega.clone())).collect() },
            })
            .collect();
        Ok(CombMeasure { dim: f.dim, components })
    }

    pub fn evaluate_window(&self, center: &[Scalar], radius: &Scalar) -> Result<WindowedDistribution> {
        self.to_distribution().evaluate_window(center, radius)
    }

    pub fn approx_eq(&self, other: &CombMeasure) -> bool {
        self.to_distribution().approx_eq(&other.to_distribution())
    }
}

impl From<&CombMeasure> for CombDistribution {
    fn from(m: &CombMeasure) -> CombDistribution {
        m.to_distribution()
    }
}

/// Reflection `f(-x)`: support `λ ↦ -λ`, `D^k` picks up `(-1)^‖k‖`, monomials
/// `(-1)^‖m‖`, frequencies negate.
pub fn reflect(f: &CombDistribution) -> CombDistribution {
    let sign = |n: u32| if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let components = f
        .components
        .iter()
        .map(|comp| {
            // -L = L, so only the translate changes
            Component {
                coset: LatticeCoset::new(comp.coset.lattice().clone(), vec_neg(comp.coset.translate()))
                    .expect("dims"),
                terms: comp
                    .terms
                    .iter()
                    .map(|t| Term {
                        k: t.k.clone(),
                        m: t.m.clone(),
                        omega: vec_neg(&t.omega),
                        c: t.c * sign(t.k.order() + t.m.order()),
                    })
                    .collect(),
            }
        })
        .collect();
    let atoms = f
        .atoms
        .iter()
        .map(|a| Atom { point: vec_neg(&a.point), k: a.k.clone(), c: a.c * sign(a.k.order()) })
        .collect();
    CombDistribution { dim: f.dim, components, atoms }.collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d, Regime::Exact)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn zcoset(d: usize) -> LatticeCoset {
        LatticeCoset::new(LatticeBasis::integer(d, Regime::Exact), vec![q(0, 1); d]).unwrap()
    }

    fn comb_with_terms(terms: Vec<Term>) -> CombDistribution {
        CombDistribution::new(1, vec![Component { coset: zcoset(1), terms }], vec![]).unwrap()
    }

    fn term(k: u32, m: u32, omega: Scalar, coef: Complex64) -> Term {
        Term::new(MultiIndex::new(vec![k]), MultiIndex::new(vec![m]), vec![omega], coef)
    }

    #[test]
    fn window_of_integer_comb() {
        let f = CombDistribution::dirac(zcoset(1));
        let w = f.evaluate_window(&[q(0, 1)], &q(5, 2)).unwrap();
        assert_eq!(w.len(), 5);
        assert!(w.points.iter().all(|p| p.mass() == c(1.0, 0.0)));
    }

    #[test]
    fn alternating_character() {
        let f = comb_with_terms(vec![term(0, 0, q(1, 2), c(1.0, 0.0))]);
        let w = f.evaluate_window(&[q(0, 1)], &q(3, 1)).unwrap();
        for p in &w.points {
            let n = p.point[0].to_f64() as i64;
            let want = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(p.mass(), c(want, 0.0));
        }
    }

    #[test]
    fn merged_cosets_add_masses() {
        let f = CombDistribution::dirac(zcoset(2));
        let g = f.add(&CombDistribution::dirac(zcoset(2))).unwrap();
        assert_eq!(g.components().len(), 1);
        let w = g.evaluate_window(&[q(0, 1), q(0, 1)], &q(2, 1)).unwrap();
        assert!(w.points.iter().all(|p| p.mass() == c(2.0, 0.0)));
    }

    #[test]
    fn translate_and_modulate_by_lattice_vectors_are_trivial() {
        let f = CombDistribution::dirac(zcoset(1));
        assert!(f.translate(&[q(1, 1)]).unwrap().approx_eq(&f));
        assert!(f.modulate(&[q(1, 1)]).unwrap().approx_eq(&f));
    }

    #[test]
    fn translate_expands_monomials() {
        let f = comb_with_terms(vec![term(0, 1, q(0, 1), c(1.0, 0.0))]);
        let g = f.translate(&[q(1, 1)]).unwrap();
        let want = comb_with_terms(vec![term(0, 1, q(0, 1), c(1.0, 0.0)), term(0, 0, q(0, 1), c(-1.0, 0.0))]);
        assert!(g.approx_eq(&want));
        // windows agree with the pushed-forward coefficients: p(λ') = λ' - 1
        let w = g.evaluate_window(&[q(0, 1)], &q(4, 1)).unwrap();
        for p in &w.points {
            assert_eq!(p.mass(), c(p.point[0].to_f64() - 1.0, 0.0));
        }
    }

    #[test]
    fn collect_examples() {
        let f = comb_with_terms(vec![term(0, 0, q(1, 1), c(1.0, 0.0)), term(0, 0, q(0, 1), c(1.0, 0.0))]);
        assert_eq!(f.components()[0].terms.len(), 1);
        assert_eq!(f.components()[0].terms[0].c, c(2.0, 0.0));

        assert!(comb_with_terms(vec![term(0, 0, q(0, 1), c(0.0, 0.0))]).is_zero());

        let g = comb_with_terms(vec![term(0, 0, q(3, 4), c(1.0, 0.0)), term(0, 0, q(7, 4), c(1.0, 0.0))]);
        let t = &g.components()[0].terms;
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].omega[0].to_doc_string(), "3/4");
        assert_eq!(t[0].c, c(2.0, 0.0));
    }

    #[test]
    fn collect_applies_translate_phase() {
        // on 1/2 + Z, exp(2πiλ·1) = exp(2πi/2) = -1 for every λ
        let coset = LatticeCoset::new(LatticeBasis::integer(1, Regime::Exact), vec![q(1, 2)]).unwrap();
        let f = CombDistribution::new(
            1,
            vec![Component { coset, terms: vec![term(0, 0, q(1, 1), c(1.0, 0.0))] }],
            vec![],
        )
        .unwrap();
        let t = &f.components()[0].terms[0];
        assert_eq!(t.omega[0].to_doc_string(), "0");
        assert_eq!(t.c, c(-1.0, 0.0));
    }

    #[test]
    fn monomial_rewrites_on_atoms() {
        let d1 = MultiIndex::new(vec![1]);
        let d2 = MultiIndex::new(vec![2]);
        let delta = CombDistribution::atom(vec![q(0, 1)], MultiIndex::zeros(1), c(1.0, 0.0)).unwrap();
        let ddelta = CombDistribution::atom(vec![q(0, 1)], d1.clone(), c(1.0, 0.0)).unwrap();
        assert!(ddelta.monomial_multiply(&d1).unwrap().approx_eq(&delta.scale(c(-1.0, 0.0))));
        assert!(delta.monomial_multiply(&d1).unwrap().is_zero());
        let dd = CombDistribution::atom(vec![q(0, 1)], d2.clone(), c(1.0, 0.0)).unwrap();
        assert!(dd.monomial_multiply(&d2).unwrap().approx_eq(&delta.scale(c(2.0, 0.0))));
    }

    #[test]
    fn pairing_examples() {
        let phi = TestFunction::gaussian(1);
        let f = CombDistribution::dirac(zcoset(1));
        let r = f.pair(&phi, Truncation::Radius(8.0)).unwrap();
        let direct: f64 = (-8..=8).map(|n: i32| (-PI * f64::from(n * n)).exp()).sum();
        assert!((r.value.re - direct).abs() < 1e-15);
        assert!((r.value.re - 1.086_434_811_213_308).abs() < 1e-12);

        let delta = CombDistribution::atom(vec![q(0, 1)], MultiIndex::zeros(1), c(1.0, 0.0)).unwrap();
        assert_eq!(delta.pair(&phi, Truncation::Radius(1.0)).unwrap().value, c(1.0, 0.0));

        let xg = phi
            .clone()
            .with_poly(crate::poly::Polynomial::from_terms(1, [(MultiIndex::new(vec![1]), c(1.0, 0.0))]))
            .unwrap();
        let dd = CombDistribution::atom(vec![q(0, 1)], MultiIndex::new(vec![1]), c(1.0, 0.0)).unwrap();
        assert!((dd.pair(&xg, Truncation::Radius(1.0)).unwrap().value - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn derivative_pairing_is_minus_sum_of_slopes() {
        let phi = TestFunction::gaussian(1).with_center(vec![0.3]).unwrap();
        let f = CombDistribution::dirac(zcoset(1)).derivative(&MultiIndex::new(vec![1])).unwrap();
        let got = f.pair(&phi, Truncation::default()).unwrap();
        let direct: f64 = (-30..=30)
            .map(|n| {
                let x = f64::from(n) - 0.3;
                -(-2.0 * PI * x * (-PI * x * x).exp())
            })
            .sum();
        assert!((got.value.re - direct).abs() < 1e-10);
        assert!(got.tail_bound < 1e-10);
    }

    #[test]
    fn auto_truncation_certifies_tail() {
        let f = CombDistribution::dirac(zcoset(2));
        let r = f.pair(&TestFunction::gaussian(2), Truncation::Auto { tolerance: 1e-10 }).unwrap();
        assert!(r.tail_bound < 1e-10);
        let err = f.pair(&TestFunction::gaussian(2), Truncation::Auto { tolerance: 0.0 });
        assert!(matches!(err, Err(Error::TailCertification { .. })));
    }

    #[test]
    fn derivative_order_overflow() {
        let f = CombDistribution::dirac(zcoset(1));
        assert!(matches!(f.derivative(&MultiIndex::new(vec![9])), Err(Error::OrderOverflow { .. })));
    }

    #[test]
    fn reflection_pairs_with_reflected_probe() {
        let coset = LatticeCoset::new(LatticeBasis::integer(1, Regime::Exact), vec![q(1, 3)]).unwrap();
        let f = CombDistribution::new(
            1,
            vec![Component { coset, terms: vec![term(1, 1, q(1, 5), c(0.5, 1.0))] }],
            vec![],
        )
        .unwrap();
        let phi = TestFunction::gaussian(1).with_center(vec![0.4]).unwrap().with_modulation(vec![0.2]).unwrap();
        let a = reflect(&f).pair(&phi, Truncation::default()).unwrap().value;
        let b = f.pair(&phi.reflect(), Truncation::default()).unwrap().value;
        assert!((a - b).norm() < 1e-12);
    }
}
