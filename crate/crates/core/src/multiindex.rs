use std::fmt;

use serde::{Deserialize, Serialize};

/// A multi-index `k = (k_1, ..., k_d)`; used both as a derivative order and
/// as a monomial exponent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(parts: Vec<u32>) -> MultiIndex {
        MultiIndex(parts)
    }

    pub fn zeros(dim: usize) -> MultiIndex {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, axis: usize) -> MultiIndex {
        let mut v = vec![0; dim];
        v[axis] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// `‖k‖ = k_1 + ... + k_d`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other` when `other <= self` componentwise.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    /// Componentwise minimum.
    pub fn min(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| *a.min(b)).collect())
    }

    /// Every `j` with `0 <= j <= self` componentwise, in lexicographic order.
    pub fn below(&self) -> Vec<MultiIndex> {
        let mut out = vec![Vec::with_capacity(self.dim())];
        for &bound in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..=bound).map(move |x| {
                        let mut p = prefix.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(MultiIndex).collect()
    }

    /// All multi-indices of dimension `dim` and order at most `max_order`.
    pub fn all_up_to(dim: usize, max_order: u32) -> Vec<MultiIndex> {
        MultiIndex(vec![max_order; dim])
            .below()
            .into_iter()
            .filter(|k| k.order() <= max_order)
            .collect()
    }

    /// `prod_i C(self_i, j_i)`.
    pub fn binomial(&self, j: &MultiIndex) -> f64 {
        self.0
            .iter()
            .zip(&j.0)
            .map(|(&n, &k)| binomial(n, k))
            .product()
    }

    /// `prod_i self_i! / (self_i - j_i)!`, zero when some `j_i > self_i`.
    pub fn falling(&self, j: &MultiIndex) -> f64 {
        self.0
            .iter()
            .zip(&j.0)
            .map(|(&a, &k)| {
                if k > a {
                    0.0
                } else {
                    ((a - k + 1)..=a).map(f64::from).product()
                }
            })
            .product()
    }

    /// `x^self`.
    pub fn pow(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}
