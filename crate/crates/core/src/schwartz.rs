//! Gaussian-Hermite test functions
//! `φ(x) = p(x - x0) · exp(-πa|x - x0|²) · exp(2πi<x, ξ0>)`.
//!
//! The family is closed under differentiation, multiplication by
//! polynomials, reflection and the Fourier transform
//! `φ̂(y) = ∫ φ(x) exp(-2πi<x,y>) dx`, all computed symbolically. It is the
//! probe set for every pairing check in the crate.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::multiindex::MultiIndex;
use crate::poly::{envelope_eval, Polynomial};

/// Largest derivative order accepted by [`TestFunction::derivative`].
pub const MAX_DERIVATIVE_ORDER: u32 = 8;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    poly: Polynomial,
    width: f64,
    center: Vec<f64>,
    modulation: Vec<f64>,
}

impl TestFunction {
    pub fn new(poly: Polynomial, width: f64, center: Vec<f64>, modulation: Vec<f64>) -> Result<TestFunction> {
        let d = poly.dim();
        check_dim(d, center.len())?;
        check_dim(d, modulation.len())?;
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidArgument(format!("width must be positive, got {width}")));
        }
        Ok(TestFunction { poly, width, center, modulation })
    }

    /// `exp(-π|x|²)` in dimension `dim`.
    pub fn gaussian(dim: usize) -> TestFunction {
        TestFunction {
            poly: Polynomial::constant(dim, Complex64::new(1.0, 0.0)),
            width: 1.0,
            center: vec![0.0; dim],
            modulation: vec![0.0; dim],
        }
    }

    pub fn with_width(mut self, width: f64) -> Result<TestFunction> {
        if !(width > 0.0) {
            return Err(Error::InvalidArgument("width must be positive".into()));
        }
        self.width = width;
        Ok(self)
    }

    pub fn with_center(mut self, center: Vec<f64>) -> Result<TestFunction> {
        check_dim(self.dim(), center.len())?;
        self.center = center;
        Ok(self)
    }

    pub fn with_modulation(mut self, modulation: Vec<f64>) -> Result<TestFunction> {
        check_dim(self.dim(), modulation.len())?;
        self.modulation = modulation;
        Ok(self)
    }

    pub fn with_poly(mut self, poly: Polynomial) -> Result<TestFunction> {
        check_dim(self.dim(), poly.dim())?;
        self.poly = poly;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn modulation(&self) -> &[f64] {
        &self.modulation
    }

    pub fn scale(&self, c: Complex64) -> TestFunction {
        TestFunction { poly: self.poly.scale(c), ..self.clone() }
    }

    /// `a·self + b·other` when both share width, center and modulation.
    pub fn combine(&self, a: Complex64, other: &TestFunction, b: Complex64) -> Option<TestFunction> {
        let compatible = self.width == other.width
            && self.center == other.center
            && self.modulation == other.modulation;
        compatible.then(|| TestFunction {
            poly: self.poly.scale(a).add(&other.poly.scale(b)),
            ..self.clone()
        })
    }

    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> Complex64 {
        let z: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let r2: f64 = z.iter().map(|v| v * v).sum();
        let phase: f64 = x.iter().zip(&self.modulation).map(|(a, b)| a * b).sum();
        let theta = 2.0 * PI * phase;
        self.poly.eval(&z) * (-PI * self.width * r2).exp() * Complex64::new(theta.cos(), theta.sin())
    }

    /// `∂/∂x_axis` as a member of the family.
    fn partial(&self, axis: usize) -> TestFunction {
        let p = &self.poly;
        let poly = p
            .partial(axis)
            .add(&p.mul_var(axis).scale(Complex64::new(-2.0 * PI * self.width, 0.0)))
            .add(&p.scale(2.0 * PI * I * self.modulation[axis]));
        TestFunction { poly, ..self.clone() }
    }

    /// `D^k φ`, symbolically.
    pub fn derivative(&self, k: &MultiIndex) -> Result<TestFunction> {
        check_dim(self.dim(), k.dim())?;
        if k.order() > MAX_DERIVATIVE_ORDER {
            return Err(Error::OrderOverflow { order: k.order(), max: MAX_DERIVATIVE_ORDER });
        }
        let mut out = self.clone();
        for (axis, &times) in k.parts().iter().enumerate() {
            for _ in 0..times {
                out = out.partial(axis);
            }
        }
        Ok(out)
    }

    pub fn eval_derivative(&self, k: &MultiIndex, x: &[f64]) -> Result<Complex64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.derivative(k)?.eval_unchecked(x))
    }

    /// `x^a φ(x)`: the monomial in absolute coordinates is re-expanded around
    /// the center.
    pub fn mul_monomial(&self, a: &MultiIndex) -> Result<TestFunction> {
        check_dim(self.dim(), a.dim())?;
        // x^a = (z + x0)^a = sum_{j<=a} C(a,j) x0^{a-j} z^j
        let mut factor = Polynomial::zero(self.dim());
        for j in a.below() {
            let rest = a.checked_sub(&j).expect("j <= a");
            let c = a.binomial(&j) * rest.pow(&self.center);
            factor.add_term(j, Complex64::new(c, 0.0));
        }
        let mut poly = Polynomial::zero(self.dim());
        for (m, c) in factor.terms() {
            poly = poly.add(&self.poly.mul_monomial(m).scale(*c));
        }
        Ok(TestFunction { poly, ..self.clone() })
    }

    /// `φ(-x)`.
    pub fn reflect(&self) -> TestFunction {
        TestFunction {
            poly: self.poly.reflect(),
            width: self.width,
            center: self.center.iter().map(|v| -v).collect(),
            modulation: self.modulation.iter().map(|v| -v).collect(),
        }
    }

    /// The Fourier transform `φ̂`, exactly within the family.
    pub fn ft(&self) -> TestFunction {
        let d = self.dim();
        let a = self.width;
        let b = 1.0 / a;
        // ψ(z) = p(z) G_a(z); ψ̂(w) = Σ c_α (-2πi)^{-|α|} D^α[a^{-d/2} G_{1/a}](w)
        let norm = a.powf(-(d as f64) / 2.0);
        let base = TestFunction {
            poly: Polynomial::constant(d, Complex64::new(norm, 0.0)),
            width: b,
            center: vec![0.0; d],
            modulation: vec![0.0; d],
        };
        let mut q = Polynomial::zero(d);
        let neg_two_pi_i = Complex64::new(0.0, -2.0 * PI);
        for (alpha, c) in self.poly.terms() {
            let deriv = base.derivative_unbounded(alpha);
            let factor = c / neg_two_pi_i.powu(alpha.order());
            q = q.add(&deriv.poly.scale(factor));
        }
        // φ(x) = ψ(x - x0) e^{2πi<x,ξ0>}  ⇒  φ̂(y) = e^{2πi<x0,ξ0>} e^{-2πi<y,x0>} ψ̂(y - ξ0)
        let phase: f64 = self.center.iter().zip(&self.modulation).map(|(u, v)| u * v).sum();
        let theta = 2.0 * PI * phase;
        TestFunction {
            poly: q.scale(Complex64::new(theta.cos(), theta.sin())),
            width: b,
            center: self.modulation.clone(),
            modulation: self.center.iter().map(|v| -v).collect(),
        }
    }

    /// The inverse transform `φ̌(y) = φ̂(-y)`.
    pub fn inverse_ft(&self) -> TestFunction {
        self.ft().reflect()
    }

    fn derivative_unbounded(&self, k: &MultiIndex) -> TestFunction {
        let mut out = self.clone();
        for (axis, &times) in k.parts().iter().enumerate() {
            for _ in 0..times {
                out = out.partial(axis);
            }
        }
        out
    }

    /// A radial bound `|φ(x)| <= envelope(|x - x0|)` where
    /// `envelope(r) = Σ_j w_j r^j exp(-πa r²)`.
    pub fn envelope(&self) -> Envelope {
        Envelope { weights: self.poly.radial_envelope(), width: self.width }
    }

    /// Grid estimate of the Schwartz norm
    /// `N_n(φ) = sup_x max_{‖k‖<=n} (1+|x|)^n |D^k φ(x)|`.
    ///
    /// The scanned box grows until the Gaussian tail certifies that nothing
    /// outside it exceeds 1% of the grid maximum; the best grid cell is then
    /// refined locally. The value is a lower bound on the true supremum.
    pub fn seminorm(&self, n: u32, grid: &SeminormGrid) -> Result<SeminormEstimate> {
        if n > MAX_DERIVATIVE_ORDER {
            return Err(Error::OrderOverflow { order: n, max: MAX_DERIVATIVE_ORDER });
        }
        let d = self.dim();
        let derivs: Vec<TestFunction> = MultiIndex::all_up_to(d, n)
            .iter()
            .map(|k| self.derivative_unbounded(k))
            .collect();
        let weight = |x: &[f64]| (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt()).powi(n as i32);
        let value_at = |x: &[f64]| {
            let m = derivs.iter().map(|f| f.eval_unchecked(x).norm()).fold(0.0, f64::max);
            weight(x) * m
        };
        let scale = 1.0 / self.width.sqrt();
        let spacing = grid.spacing.unwrap_or(match d {
            1 => 0.005,
            2 => 0.04,
            _ => 0.15,
        }) * scale;
        let center_norm = self.center.iter().map(|v| v * v).sum::<f64>().sqrt();
        let envelopes: Vec<Envelope> = derivs.iter().map(TestFunction::envelope).collect();
        let outside_sup = |b: f64| {
            // sup over r >= b of (1 + |x0| + r)^n · max_k envelope_k(r)
            let steps = 4000;
            let span = 12.0 * scale + 2.0 * f64::from(n) * scale;
            (0..=steps)
                .map(|i| {
                    let r = b + span * i as f64 / steps as f64;
                    (1.0 + center_norm + r).powi(n as i32)
                        * envelopes.iter().map(|e| e.eval(r)).fold(0.0, f64::max)
                })
                .fold(0.0, f64::max)
        };

        let mut half = grid.initial_half_width.unwrap_or(3.0) * scale;
        loop {
            let (best_x, best) = scan_box(&self.center, half, spacing, &value_at);
            let tail = outside_sup(half);
            if tail <= 0.01 * best || half > 1e3 * scale {
                let refined = refine(&best_x, spacing, &value_at).max(best);
                return Ok(SeminormEstimate {
                    order: n,
                    value: refined,
                    half_width: half,
                    spacing,
                    tail_bound: tail,
                });
            }
            half *= 1.5;
        }
    }
}

/// Radial bound `Σ_j w_j r^j exp(-πa r²)`.
#[derive(Debug, Clone)]
pub struct Envelope {
    pub weights: Vec<f64>,
    pub width: f64,
}

impl Envelope {
    pub fn eval(&self, r: f64) -> f64 {
        envelope_eval(&self.weights, r) * (-PI * self.width * r * r).exp()
    }

    /// Upper bound of the envelope on the shell `s <= r <= s + 1`.
    pub fn shell_bound(&self, s: f64) -> f64 {
        envelope_eval(&self.weights, s + 1.0) * (-PI * self.width * s * s).exp()
    }
}

/// Scan parameters for [`TestFunction::seminorm`]. Both fields scale with
/// `1/sqrt(a)`; `None` selects a dimension-dependent default.
#[derive(Debug, Clone, Default)]
pub struct SeminormGrid {
    pub spacing: Option<f64>,
    pub initial_half_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeminormEstimate {
    pub order: u32,
    pub value: f64,
    pub half_width: f64,
    pub spacing: f64,
    pub tail_bound: f64,
}

fn scan_box(center: &[f64], half: f64, spacing: f64, f: &impl Fn(&[f64]) -> f64) -> (Vec<f64>, f64) {
    let d = center.len();
    let n = (2.0 * half / spacing).ceil() as i64;
    let boxes = vec![(0, n); d];
    let mut best = (center.to_vec(), f64::NEG_INFINITY);
    let mut x = vec![0.0; d];
    crate::lattice::for_each_in_box(&boxes, |idx| {
        for i in 0..d {
            x[i] = center[i] - half + spacing * idx[i] as f64;
        }
        let v = f(&x);
        if v > best.1 {
            best = (x.clone(), v);
        }
    });
    // Always include the origin, where the weight is smallest but the function
    // might peak when the center is far away.
    let origin = vec![0.0; d];
    let v = f(&origin);
    if v > best.1 {
        best = (origin, v);
    }
    best
}

fn refine(x: &[f64], spacing: f64, f: &impl Fn(&[f64]) -> f64) -> f64 {
    let d = x.len();
    let fine = spacing / 10.0;
    let boxes = vec![(-10, 10); d];
    let mut best = f64::NEG_INFINITY;
    let mut y = vec![0.0; d];
    crate::lattice::for_each_in_box(&boxes, |idx| {
        for i in 0..d {
            y[i] = x[i] + fine * idx[i] as f64;
        }
        best = best.max(f(&y));
    });
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::CompositeRule;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn x_gauss() -> TestFunction {
        TestFunction::gaussian(1)
            .with_poly(Polynomial::from_terms(1, [(MultiIndex::new(vec![1]), c(1.0, 0.0))]))
            .unwrap()
    }

    /// Direct quadrature of ∫ φ(x) e^{-2πixy} dx on [-R, R].
    fn quad_ft(phi: &TestFunction, y: f64) -> Complex64 {
        let r = phi.center()[0].abs() + 12.0 / phi.width().sqrt();
        let rule = CompositeRule::new(-r, r, 200, 20);
        rule.integrate(|x| {
            let t = -2.0 * PI * x * y;
            phi.eval(&[x]).unwrap() * Complex64::new(t.cos(), t.sin())
        })
    }

    #[test]
    fn gaussian_is_self_dual() {
        let g = TestFunction::gaussian(1);
        let h = g.ft();
        for y in [-1.3, 0.0, 0.7, 2.0] {
            assert!((h.eval(&[y]).unwrap() - g.eval(&[y]).unwrap()).norm() < 1e-15);
        }
    }

    #[test]
    fn modulation_becomes_translation() {
        let g = TestFunction::gaussian(1).with_modulation(vec![0.6]).unwrap();
        let h = g.ft();
        for y in [-1.0, 0.0, 0.6, 1.9] {
            let want = (-PI * (y - 0.6) * (y - 0.6)).exp();
            assert!((h.eval(&[y]).unwrap() - c(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn x_gaussian_transform_matches_closed_form_and_quadrature() {
        let h = x_gauss().ft();
        for y in [-1.5, -0.2, 0.0, 0.4, 1.1] {
            let closed = c(0.0, -y) * (-PI * y * y).exp();
            assert!((h.eval(&[y]).unwrap() - closed).norm() < 1e-15);
            assert!((quad_ft(&x_gauss(), y) - closed).norm() < 1e-10);
        }
    }

    #[test]
    fn general_member_matches_quadrature() {
        let p = Polynomial::from_terms(
            1,
            [
                (MultiIndex::new(vec![0]), c(0.5, -0.25)),
                (MultiIndex::new(vec![2]), c(-1.0, 0.5)),
                (MultiIndex::new(vec![3]), c(0.2, 0.0)),
            ],
        );
        let phi = TestFunction::new(p, 1.7, vec![0.3], vec![-0.45]).unwrap();
        let h = phi.ft();
        for y in [-2.0, -0.5, 0.1, 0.9] {
            assert!((h.eval(&[y]).unwrap() - quad_ft(&phi, y)).norm() < 1e-10, "y = {y}");
        }
    }

    #[test]
    fn eval_examples() {
        let g = TestFunction::gaussian(1);
        assert_eq!(g.eval(&[0.0]).unwrap(), c(1.0, 0.0));
        assert!(g.eval(&[10.0]).unwrap().norm() <= (-PI * 100.0).exp());
        let v = x_gauss().eval(&[1.0]).unwrap();
        assert!((v.re - 0.043_213_918_263_772_25).abs() < 1e-15);
        assert!(g.eval(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn derivative_examples() {
        let g = TestFunction::gaussian(1);
        let k0 = MultiIndex::new(vec![0]);
        assert_eq!(g.eval_derivative(&k0, &[0.4]).unwrap(), g.eval(&[0.4]).unwrap());
        assert_eq!(g.eval_derivative(&MultiIndex::new(vec![1]), &[0.0]).unwrap().norm(), 0.0);
        let v = g.eval_derivative(&MultiIndex::new(vec![2]), &[0.0]).unwrap();
        assert!((v - c(-2.0 * PI, 0.0)).norm() < 1e-14);
        assert!(matches!(
            g.eval_derivative(&MultiIndex::new(vec![9]), &[0.0]),
            Err(Error::OrderOverflow { .. })
        ));
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let p = Polynomial::from_terms(
            2,
            [
                (MultiIndex::new(vec![0, 0]), c(1.0, 0.5)),
                (MultiIndex::new(vec![1, 1]), c(-0.3, 0.0)),
            ],
        );
        let phi = TestFunction::new(p, 0.8, vec![0.2, -0.1], vec![0.3, 0.15]).unwrap();
        let h = 1e-4;
        let x = [0.35, -0.6];
        for axis in 0..2 {
            let k = MultiIndex::unit(2, axis);
            let mut xp = x;
            let mut xm = x;
            xp[axis] += h;
            xm[axis] -= h;
            let fd = (phi.eval(&xp).unwrap() - phi.eval(&xm).unwrap()) / (2.0 * h);
            let exact = phi.eval_derivative(&k, &x).unwrap();
            assert!((fd - exact).norm() <= 1e-6 * exact.norm().max(1e-3));
        }
    }

    #[test]
    fn double_transform_is_reflection() {
        let p = Polynomial::from_terms(1, [(MultiIndex::new(vec![1]), c(0.0, 1.0)), (MultiIndex::new(vec![0]), c(2.0, 0.0))]);
        let phi = TestFunction::new(p, 0.6, vec![0.7], vec![-0.2]).unwrap();
        let twice = phi.ft().ft();
        for x in [-1.0, 0.0, 0.5, 1.5] {
            assert!((twice.eval(&[x]).unwrap() - phi.eval(&[-x]).unwrap()).norm() < 1e-12);
        }
        let back = phi.ft().inverse_ft();
        for x in [-1.0, 0.3, 1.2] {
            assert!((back.eval(&[x]).unwrap() - phi.eval(&[x]).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn seminorm_examples() {
        let g = TestFunction::gaussian(1);
        let grid = SeminormGrid::default();
        assert!((g.seminorm(0, &grid).unwrap().value - 1.0).abs() < 1e-9);
        let two = g.scale(c(2.0, 0.0));
        assert!((two.seminorm(0, &grid).unwrap().value - 2.0).abs() < 1e-9);

        // Dense independent scan of (1+|x|)·max(φ, |φ'|).
        let brute = (0..400_001)
            .map(|i| {
                let x = -8.0 + 16.0 * i as f64 / 400_000.0;
                let f = (-PI * x * x).exp();
                (1.0 + x.abs()) * f.max((2.0 * PI * x * f).abs())
            })
            .fold(0.0, f64::max);
        let est = g.seminorm(1, &grid).unwrap();
        assert!(est.value <= brute * (1.0 + 1e-9));
        assert!(est.value >= 0.99 * brute);
        assert!(est.tail_bound <= 0.01 * est.value);
    }
}
