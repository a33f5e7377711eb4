//! Complex polynomials in `d` real variables.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::multiindex::MultiIndex;

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Polynomial {
        Polynomial { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Complex64) -> Polynomial {
        let mut p = Polynomial::zero(dim);
        p.add_term(MultiIndex::zeros(dim), c);
        p
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (MultiIndex, Complex64)>) -> Polynomial {
        let mut p = Polynomial::zero(dim);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: MultiIndex, c: Complex64) {
        assert_eq!(m.dim(), self.dim, "monomial dimension");
        let entry = self.terms.entry(m).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.retain(|_, v| *v != Complex64::new(0.0, 0.0));
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut p = self.clone();
        for (m, c) in &other.terms {
            p.add_term(m.clone(), *c);
        }
        p
    }

    pub fn scale(&self, s: Complex64) -> Polynomial {
        Polynomial::from_terms(self.dim, self.terms.iter().map(|(m, c)| (m.clone(), c * s)))
    }

    /// Multiplies by `z_axis`.
    pub fn mul_var(&self, axis: usize) -> Polynomial {
        let e = MultiIndex::unit(self.dim, axis);
        Polynomial::from_terms(self.dim, self.terms.iter().map(|(m, c)| (m.add(&e), *c)))
    }

    pub fn mul_monomial(&self, a: &MultiIndex) -> Polynomial {
        Polynomial::from_terms(self.dim, self.terms.iter().map(|(m, c)| (m.add(a), *c)))
    }

    /// `∂/∂z_axis`.
    pub fn partial(&self, axis: usize) -> Polynomial {
        let e = MultiIndex::unit(self.dim, axis);
        Polynomial::from_terms(
            self.dim,
            self.terms.iter().filter_map(|(m, c)| {
                let k = m.parts()[axis];
                m.checked_sub(&e).map(|lower| (lower, c * f64::from(k)))
            }),
        )
    }

    /// `p(-z)`.
    pub fn reflect(&self) -> Polynomial {
        Polynomial::from_terms(
            self.dim,
            self.terms.iter().map(|(m, c)| {
                let sign = if m.order() % 2 == 0 { 1.0 } else { -1.0 };
                (m.clone(), c * sign)
            }),
        )
    }

    pub fn eval(&self, z: &[f64]) -> Complex64 {
        self.terms.iter().map(|(m, c)| c * m.pow(z)).sum()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    /// `|p(z)| <= sum_j w_j |z|^j`; returns the weights `w_j`.
    pub fn radial_envelope(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.degree() as usize + 1];
        for (m, c) in &self.terms {
            w[m.order() as usize] += c.norm();
        }
        w
    }

    /// Drops coefficients with modulus at most `tol`.
    pub fn pruned(&self, tol: f64) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().filter(|(_, c)| c.norm() > tol).map(|(m, c)| (m.clone(), *c)).collect(),
        }
    }
}

pub fn envelope_eval(weights: &[f64], r: f64) -> f64 {
    weights.iter().enumerate().map(|(j, w)| w * r.powi(j as i32)).sum()
}
