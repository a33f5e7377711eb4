#![allow(dead_code)]

use latcomb::lattice::LatticeBasis;
use latcomb::scalar::{Regime, Scalar, Vector};
use proptest::prelude::*;

pub fn q(num: i64, den: i64) -> Scalar {
    Scalar::ratio(num, den, Regime::Exact)
}

pub fn rational() -> impl Strategy<Value = Scalar> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| q(n, d))
}

pub fn rational_vec(d: usize) -> impl Strategy<Value = Vector> {
    proptest::collection::vec(rational(), d)
}

/// Rational generator with `|det| >= 1/4`.
pub fn lattice(d: usize) -> impl Strategy<Value = LatticeBasis> {
    proptest::collection::vec(proptest::collection::vec((-6i64..=6, 1i64..=4).prop_map(|(n, k)| q(n, k)), d), d)
        .prop_filter_map("singular", |rows| {
            let l = LatticeBasis::from_rows(rows).ok()?;
            (l.abs_det_f64() >= 0.25).then_some(l)
        })
}

/// Polynomial-times-Gaussian probe drawn from the library's own family.
pub fn probe(d: usize) -> impl Strategy<Value = latcomb::schwartz::TestFunction> {
    any::<u64>().prop_map(move |s| latcomb::fourier::random_probes(d, 1, s).remove(0))
}
