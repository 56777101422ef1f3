//! Numeric backends shared by every solver.
//!
//! Three implementations of [`Scalar`] exist:
//!
//! * `f64` for ordinary double-precision work,
//! * [`Rational`] (arbitrary-precision rationals) for exact evaluation,
//! * [`BigFloat`] (binary floating point with a chosen mantissa width) used
//!   internally when double precision cannot carry an unstable recurrence.
//!
//! `BigFloat` values carry their own precision, so constants are always
//! derived from an existing value through the `*_like` constructors.

use std::cmp::Ordering;
use std::fmt::{self, Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, UBig};
use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number.
pub type Rational = BigRational;

/// Which arithmetic a value lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    Float,
    Exact,
}

impl Display for NumericMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumericMode::Float => f.write_str("float"),
            NumericMode::Exact => f.write_str("exact"),
        }
    }
}

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic never rounds.
    const EXACT: bool;

    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_f64_like(&self, x: f64) -> Self;
    fn from_rational_like(&self, r: &Rational) -> Self;

    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// Exact rational value of the stored number.
    fn to_rational(&self) -> Rational;
    /// log2 |x|, or `-inf` for zero. Only an estimate for magnitude monitoring.
    fn log2_abs(&self) -> f64;

    fn abs(&self) -> Self {
        if *self < self.zero_like() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn from_usize_like(&self, n: usize) -> Self {
        self.from_rational_like(&Rational::from_integer(BigInt::from(n)))
    }

    /// Mantissa width in bits; `None` for exact arithmetic.
    fn precision_bits(&self) -> Option<usize>;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero_like(&self) -> Self {
        0.0
    }
    fn one_like(&self) -> Self {
        1.0
    }
    fn from_f64_like(&self, x: f64) -> Self {
        x
    }
    fn from_rational_like(&self, r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).expect("finite f64")
    }
    fn log2_abs(&self) -> f64 {
        if *self == 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::abs(*self).log2()
        }
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn precision_bits(&self) -> Option<usize> {
        Some(53)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn from_f64_like(&self, x: f64) -> Self {
        Rational::from_float(x).expect("finite f64")
    }
    fn from_rational_like(&self, r: &Rational) -> Self {
        r.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn log2_abs(&self) -> f64 {
        if Zero::is_zero(self) {
            return f64::NEG_INFINITY;
        }
        let n = self.numer().bits() as f64;
        let d = self.denom().bits() as f64;
        n - d
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn precision_bits(&self) -> Option<usize> {
        None
    }
}

/// Conversion that stays accurate for huge numerators and denominators.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let Some(x) = ToPrimitive::to_f64(r) {
        if x.is_finite() && (x != 0.0 || Zero::is_zero(r.numer())) {
            return x;
        }
    }
    // Fall back to scaling by powers of two.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = nb - db - 60;
    let scaled = if shift >= 0 {
        r.numer().clone() / (r.denom().clone() << (shift as usize))
    } else {
        (r.numer().clone() << ((-shift) as usize)) / r.denom().clone()
    };
    scaled.to_f64().unwrap_or(0.0) * 2f64.powi(shift as i32)
}

/// Parses `"0.25"`, `"-1.5e-3"`, `"3"` or `"1/3"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if Zero::is_zero(&d) {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let all = all / BigInt::from(10);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Some(value)
}

type Fb = FBig<HalfEven>;

/// Binary floating point number with an explicit mantissa width.
#[derive(Clone)]
pub struct BigFloat(Fb);

impl BigFloat {
    pub fn from_f64(x: f64, precision: usize) -> Self {
        let v = Fb::try_from(x).expect("finite f64");
        BigFloat(v.with_precision(precision).value())
    }

    pub fn from_rational(r: &Rational, precision: usize) -> Self {
        let num = Fb::from(bigint_to_ibig(r.numer())).with_precision(precision).value();
        let den = Fb::from(bigint_to_ibig(r.denom())).with_precision(precision).value();
        BigFloat(num / den)
    }

    pub fn precision(&self) -> usize {
        self.0.precision()
    }
}

fn bigint_to_ibig(b: &BigInt) -> IBig {
    let (sign, bytes) = b.to_bytes_le();
    let mag = IBig::from(UBig::from_le_bytes(&bytes));
    if sign == Sign::Minus {
        -mag
    } else {
        mag
    }
}

fn ibig_to_bigint(i: &IBig) -> BigInt {
    let negative = *i < IBig::ZERO;
    let mag: UBig = if negative { (-i.clone()).try_into().unwrap() } else { i.clone().try_into().unwrap() };
    let bytes = mag.to_le_bytes();
    BigInt::from_bytes_le(if negative { Sign::Minus } else { Sign::Plus }, &bytes)
}

impl Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigFloat({:e}, {} bits)", self.0.to_f64().value(), self.0.precision())
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! bigfloat_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for BigFloat {
            type Output = BigFloat;
            fn $m(self, rhs: BigFloat) -> BigFloat {
                BigFloat(self.0 $op rhs.0)
            }
        }
    };
}
bigfloat_op!(Add, add, +);
bigfloat_op!(Sub, sub, -);
bigfloat_op!(Mul, mul, *);
bigfloat_op!(Div, div, /);

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        BigFloat(-self.0)
    }
}

impl Scalar for BigFloat {
    const EXACT: bool = false;

    fn zero_like(&self) -> Self {
        BigFloat(Fb::ZERO.with_precision(self.precision()).value())
    }
    fn one_like(&self) -> Self {
        BigFloat(Fb::ONE.with_precision(self.precision()).value())
    }
    fn from_f64_like(&self, x: f64) -> Self {
        BigFloat::from_f64(x, self.precision())
    }
    fn from_rational_like(&self, r: &Rational) -> Self {
        BigFloat::from_rational(r, self.precision())
    }
    fn is_zero(&self) -> bool {
        self.0.repr().significand().is_zero()
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
    fn to_rational(&self) -> Rational {
        let repr = self.0.repr();
        let sig = ibig_to_bigint(repr.significand());
        let exp = repr.exponent();
        if exp >= 0 {
            Rational::from_integer(sig << (exp as usize))
        } else {
            Rational::new(sig, BigInt::one() << ((-exp) as usize))
        }
    }
    fn log2_abs(&self) -> f64 {
        let repr = self.0.repr();
        if repr.significand().is_zero() {
            return f64::NEG_INFINITY;
        }
        let sig = repr.significand();
        let bits = ibig_to_bigint(sig).bits() as f64;
        bits + repr.exponent() as f64
    }
    fn abs(&self) -> Self {
        if self.0 < Fb::ZERO {
            BigFloat(-self.0.clone())
        } else {
            self.clone()
        }
    }
    fn precision_bits(&self) -> Option<usize> {
        Some(self.precision())
    }
}

/// Largest of `log2|x|` over a slice; `-inf` for an empty or all-zero slice.
pub fn max_log2<T: Scalar>(values: &[T]) -> f64 {
    values.iter().map(Scalar::log2_abs).fold(f64::NEG_INFINITY, f64::max)
}
