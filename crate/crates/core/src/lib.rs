#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod almostperiodic;
pub mod cli;
pub mod comb;
pub mod document;
pub mod error;
pub mod fit;
pub mod fourier;
pub mod gallery;
pub mod lattice;
pub mod linalg;
pub mod multiindex;
pub mod pointset;
pub mod poly;
pub mod quadrature;
pub mod scalar;
pub mod schwartz;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lattices.md")]
    mod lattices {}
    #[doc = include_str!("../../../book/src/test-functions.md")]
    mod test_functions {}
    #[doc = include_str!("../../../book/src/combs.md")]
    mod combs {}
    #[doc = include_str!("../../../book/src/fourier.md")]
    mod fourier {}
    #[doc = include_str!("../../../book/src/point-sets.md")]
    mod point_sets {}
    #[doc = include_str!("../../../book/src/almost-periods.md")]
    mod almost_periods {}
    #[doc = include_str!("../../../book/src/gallery.md")]
    mod gallery {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
