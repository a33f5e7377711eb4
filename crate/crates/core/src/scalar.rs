//! Numeric substrate: exact rationals or tolerance-tagged doubles.
//!
//! Every lattice entry, translate and frequency is a [`Scalar`]. The exact
//! regime gives decidable equality, which canonical forms rely on; the float
//! regime exists for constructions with irrational entries and compares with
//! the relative tolerance [`TAU_EQ`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Relative equality tolerance of the float regime.
pub const TAU_EQ: f64 = 1e-9;

/// Absolute magnitude below which float-regime coefficients are pruned.
pub const TAU_DROP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Exact,
    Float,
}

impl Regime {
    /// The regime of a result combining both operands.
    pub fn join(self, other: Regime) -> Regime {
        if self == Regime::Exact && other == Regime::Exact {
            Regime::Exact
        } else {
            Regime::Float
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Exact => "exact",
            Regime::Float => "float",
        }
    }

    pub fn parse(s: &str) -> Result<Regime> {
        match s {
            "exact" => Ok(Regime::Exact),
            "float" => Ok(Regime::Float),
            other => Err(Error::Parse(format!("unknown regime {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

impl Scalar {
    pub fn zero(regime: Regime) -> Scalar {
        Scalar::from_int(0, regime)
    }

    pub fn one(regime: Regime) -> Scalar {
        Scalar::from_int(1, regime)
    }

    pub fn from_int(n: i64, regime: Regime) -> Scalar {
        match regime {
            Regime::Exact => Scalar::Exact(BigRational::from_integer(BigInt::from(n))),
            Regime::Float => Scalar::Float(n as f64),
        }
    }

    pub fn from_bigint(n: &BigInt, regime: Regime) -> Scalar {
        match regime {
            Regime::Exact => Scalar::Exact(BigRational::from_integer(n.clone())),
            Regime::Float => Scalar::Float(n.to_f64().unwrap_or(f64::NAN)),
        }
    }

    /// `num/den` in the requested regime. Panics on a zero denominator.
    pub fn ratio(num: i64, den: i64, regime: Regime) -> Scalar {
        assert!(den != 0, "zero denominator");
        match regime {
            Regime::Exact => Scalar::Exact(BigRational::new(num.into(), den.into())),
            Regime::Float => Scalar::Float(num as f64 / den as f64),
        }
    }

    pub fn float(x: f64) -> Scalar {
        Scalar::Float(x)
    }

    pub fn regime(&self) -> Regime {
        match self {
            Scalar::Exact(_) => Regime::Exact,
            Scalar::Float(_) => Regime::Float,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => rational_to_f64(q),
            Scalar::Float(x) => *x,
        }
    }

    /// Converts into the given regime. Float to exact is lossless (the binary
    /// value of the double is kept).
    pub fn to_regime(&self, regime: Regime) -> Scalar {
        match (self, regime) {
            (Scalar::Exact(_), Regime::Exact) | (Scalar::Float(_), Regime::Float) => self.clone(),
            (Scalar::Exact(q), Regime::Float) => Scalar::Float(rational_to_f64(q)),
            (Scalar::Float(x), Regime::Exact) => Scalar::Exact(
                BigRational::from_float(*x).unwrap_or_else(BigRational::zero),
            ),
        }
    }

    /// Exact zero test; float values use the absolute [`TAU_DROP`] floor.
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Float(x) => x.abs() <= TAU_DROP,
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(q.abs()),
            Scalar::Float(x) => Scalar::Float(x.abs()),
        }
    }

    /// Floor as an integer. In the float regime values within `TAU_EQ` of an
    /// integer snap to it, so reduction into `[0,1)` is stable.
    pub fn floor(&self) -> BigInt {
        match self {
            Scalar::Exact(q) => q.floor().to_integer(),
            Scalar::Float(x) => {
                let r = x.round();
                let snapped = if (x - r).abs() <= TAU_EQ * x.abs().max(1.0) { r } else { x.floor() };
                BigInt::from(snapped as i64)
            }
        }
    }

    /// True if the value is an integer (exactly, or within tolerance).
    pub fn is_integer(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_integer(),
            Scalar::Float(x) => (x - x.round()).abs() <= TAU_EQ * x.abs().max(1.0),
        }
    }

    /// Equality: exact when both are exact, otherwise relative `TAU_EQ`.
    pub fn approx_eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                (a - b).abs() <= TAU_EQ * a.abs().max(b.abs()).max(1.0)
            }
        }
    }

    /// A total order used for canonical sorting. Mixed comparisons go through
    /// `f64`; NaN sorts last.
    pub fn cmp_total(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Scalar::Exact(q) => {
                if q.is_zero() {
                    0
                } else if q.is_positive() {
                    1
                } else {
                    -1
                }
            }
            Scalar::Float(x) => {
                if *x == 0.0 {
                    0
                } else if *x > 0.0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    /// Parses `"p/q"`, an integer, or a decimal literal into `regime`.
    /// Decimals in the exact regime are read exactly (`"0.25"` is `1/4`).
    pub fn parse(s: &str, regime: Regime) -> Result<Scalar> {
        let t = s.trim();
        if t.is_empty() {
            return Err(Error::Parse("empty numeric literal".into()));
        }
        if let Some((n, d)) = t.split_once('/') {
            let num = parse_decimal(n.trim())?;
            let den = parse_decimal(d.trim())?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {t:?}")));
            }
            let q = num / den;
            return Ok(match regime {
                Regime::Exact => Scalar::Exact(q),
                Regime::Float => Scalar::Float(rational_to_f64(&q)),
            });
        }
        match regime {
            Regime::Exact => Ok(Scalar::Exact(parse_decimal(t)?)),
            Regime::Float => t
                .parse::<f64>()
                .map(Scalar::Float)
                .map_err(|_| Error::Parse(format!("invalid number {t:?}"))),
        }
    }

    /// Document representation: `p/q` for exact values, 17 significant
    /// digits for doubles.
    pub fn to_doc_string(&self) -> String {
        match self {
            Scalar::Exact(q) => {
                if q.is_integer() {
                    q.numer().to_string()
                } else {
                    format!("{}/{}", q.numer(), q.denom())
                }
            }
            Scalar::Float(x) => format_f64(*x),
        }
    }

    /// Fractional part in `[0,1)`.
    pub fn fract(&self) -> Scalar {
        let fl = self.floor();
        self - &Scalar::from_bigint(&fl, self.regime())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_doc_string())
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        self.approx_eq(other)
    }
}

/// Fixed 17-significant-digit rendering used in every emitted document.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        // collapse -0
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

fn parse_decimal(t: &str) -> Result<BigRational> {
    let err = || Error::Parse(format!("invalid number {t:?}"));
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = digits.parse().map_err(|_| err())?;
    if neg {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let q = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(q)
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 9.0e15 && d < 9.0e15 {
            return n / d;
        }
    }
    q.to_f64().unwrap_or(f64::NAN)
}

/// `e^{2πi q}`. Exact arguments are reduced modulo one before the
/// trigonometric call; multiples of 1/4 map to exact unit values.
pub fn exp_2pi_i(q: &Scalar) -> Complex64 {
    match q {
        Scalar::Exact(r) => {
            let frac = r - r.floor();
            let four = BigInt::from(4);
            let scaled = &frac * BigRational::from_integer(four.clone());
            if scaled.is_integer() {
                return match scaled.to_integer().mod_floor(&four).to_i64().unwrap_or(0) {
                    0 => Complex64::new(1.0, 0.0),
                    1 => Complex64::new(0.0, 1.0),
                    2 => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(0.0, -1.0),
                };
            }
            let theta = 2.0 * std::f64::consts::PI * rational_to_f64(&frac);
            Complex64::new(theta.cos(), theta.sin())
        }
        Scalar::Float(x) => {
            let frac = x - x.floor();
            let theta = 2.0 * std::f64::consts::PI * frac;
            Complex64::new(theta.cos(), theta.sin())
        }
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<'a> $tr<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    _ => Scalar::Float(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn div(self, rhs: &'a Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                assert!(!b.is_zero(), "division by exact zero");
                Scalar::Exact(a / b)
            }
            _ => Scalar::Float(self.to_f64() / rhs.to_f64()),
        }
    }
}

impl Div<Scalar> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        &self / &rhs
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(-a),
            Scalar::Float(x) => Scalar::Float(-x),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

/// Vectors of scalars; used for points, translates and frequencies.
pub type Vector = Vec<Scalar>;

pub fn vec_add(a: &[Scalar], b: &[Scalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Scalar], b: &[Scalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_neg(a: &[Scalar]) -> Vector {
    a.iter().map(|x| -x).collect()
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    let regime = a.iter().chain(b).fold(Regime::Exact, |r, s| r.join(s.regime()));
    a.iter().zip(b).fold(Scalar::zero(regime), |acc, (x, y)| acc + x * y)
}

pub fn vec_to_f64(a: &[Scalar]) -> Vec<f64> {
    a.iter().map(Scalar::to_f64).collect()
}

pub fn vec_approx_eq(a: &[Scalar], b: &[Scalar]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y))
}

pub fn vec_cmp(a: &[Scalar], b: &[Scalar]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp_total(y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

pub fn vec_regime(a: &[Scalar]) -> Regime {
    a.iter().fold(Regime::Exact, |r, s| r.join(s.regime()))
}

pub fn zero_vec(d: usize, regime: Regime) -> Vector {
    vec![Scalar::zero(regime); d]
}

/// Euclidean norm, evaluated in `f64`.
pub fn norm_f64(a: &[Scalar]) -> f64 {
    a.iter().map(|x| x.to_f64().powi(2)).sum::<f64>().sqrt()
}

/// Parses a whole slice of literals.
pub fn parse_vec(items: &[String], regime: Regime) -> Result<Vector> {
    items.iter().map(|s| Scalar::parse(s, regime)).collect()
}

pub fn one_rational() -> BigRational {
    BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_decimals_exactly() {
        let a = Scalar::parse("3/4", Regime::Exact).unwrap();
        let b = Scalar::parse("0.75", Regime::Exact).unwrap();
        assert!(matches!((&a, &b), (Scalar::Exact(x), Scalar::Exact(y)) if x == y));
        let c = Scalar::parse("-1.5e-1", Regime::Exact).unwrap();
        assert_eq!(c.to_doc_string(), "-3/20");
        assert!(Scalar::parse("1/0", Regime::Exact).is_err());
        assert!(Scalar::parse("abc", Regime::Float).is_err());
    }

    #[test]
    fn floor_and_fract() {
        let x = Scalar::parse("-7/3", Regime::Exact).unwrap();
        assert_eq!(x.floor(), BigInt::from(-3));
        assert_eq!(x.fract().to_doc_string(), "2/3");
        let y = Scalar::Float(2.9999999999999);
        assert_eq!(y.floor(), BigInt::from(3));
    }

    #[test]
    fn quarter_phases_are_exact() {
        let half = Scalar::ratio(1, 2, Regime::Exact);
        assert_eq!(exp_2pi_i(&half), Complex64::new(-1.0, 0.0));
        let q = Scalar::ratio(-1, 4, Regime::Exact);
        assert_eq!(exp_2pi_i(&q), Complex64::new(0.0, -1.0));
        let third = Scalar::ratio(1, 3, Regime::Exact);
        let z = exp_2pi_i(&third);
        assert!((z.re + 0.5).abs() < 1e-15 && (z.im - 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn doc_strings_round_trip() {
        for v in [0.1, -3.25e-7, 1.0 / 3.0, 2f64.sqrt()] {
            let s = Scalar::Float(v).to_doc_string();
            assert_eq!(Scalar::parse(&s, Regime::Float).unwrap().to_f64(), v);
        }
    }
}
