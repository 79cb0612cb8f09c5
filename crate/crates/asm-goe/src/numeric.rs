//! Scalar types shared by the exact and high-precision code paths.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, UBig};
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Field operations needed by the Pfaffian and kernel assembly code.
pub trait Scalar:
    Clone
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Exact fields pivot on the first nonzero entry, inexact ones on the largest.
    const EXACT: bool;
    fn zero_like(&self) -> Self;
    fn from_i64_like(&self, v: i64) -> Self;
    fn is_zero_val(&self) -> bool;
    fn magnitude(&self) -> f64;
    fn to_f64_val(&self) -> f64;
}

impl Scalar for Rational {
    const EXACT: bool = true;
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn from_i64_like(&self, v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn is_zero_val(&self) -> bool {
        self.is_zero()
    }
    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
    fn to_f64_val(&self) -> f64 {
        rational_to_f64(self)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn zero_like(&self) -> Self {
        0.0
    }
    fn from_i64_like(&self, v: i64) -> Self {
        v as f64
    }
    fn is_zero_val(&self) -> bool {
        *self == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn to_f64_val(&self) -> f64 {
        *self
    }
}

/// Converts a rational to the nearest-ish `f64`, robust to huge numerators
/// and denominators.
pub fn rational_to_f64(q: &Rational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = 64 - (nb - db);
    let scaled: BigInt = if shift >= 0 {
        (q.numer() << shift as usize) / q.denom()
    } else {
        q.numer() / (q.denom() << (-shift) as usize)
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-(shift as i32))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// `"p/q"` form used in JSON output (`"p"` when the denominator is 1).
pub fn rational_string(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    match s.split_once('/') {
        Some((a, b)) => {
            let d: BigInt = b.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(a.trim().parse().ok()?, d))
        }
        None => Some(Rational::from_integer(s.trim().parse().ok()?)),
    }
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Binomial coefficient with `C(a, b) = 0` unless `0 <= b <= a`.
pub fn binomial(a: i64, b: i64) -> BigInt {
    if b < 0 || a < 0 || b > a {
        return BigInt::zero();
    }
    let b = b.min(a - b);
    let mut acc = BigInt::one();
    for i in 0..b {
        acc = acc * BigInt::from(a - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn catalan(n: u64) -> BigInt {
    binomial(2 * n as i64, n as i64) / BigInt::from(n + 1)
}

type Fb = FBig<HalfEven, 2>;

/// Binary floating point number with an explicit mantissa length.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct BigFloat {
    v: Fb,
    bits: usize,
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

fn to_ubig(n: &num_bigint::BigUint) -> UBig {
    UBig::from_le_bytes(&n.to_bytes_le())
}

pub fn bigint_to_ibig(n: &BigInt) -> IBig {
    let mag = IBig::from(to_ubig(n.magnitude()));
    if n.sign() == Sign::Minus {
        -mag
    } else {
        mag
    }
}

impl BigFloat {
    pub fn from_i64(v: i64, bits: usize) -> Self {
        Self::from_fb(Fb::from(v), bits)
    }

    fn from_fb(v: Fb, bits: usize) -> Self {
        let v = v.with_precision(bits).value();
        BigFloat { v, bits }
    }

    pub fn from_bigint(n: &BigInt, bits: usize) -> Self {
        Self::from_fb(Fb::from(bigint_to_ibig(n)), bits)
    }

    pub fn from_ratio(num: &BigInt, den: &BigInt, bits: usize) -> Self {
        Self::from_bigint(num, bits) / Self::from_bigint(den, bits)
    }

    pub fn from_rational(q: &Rational, bits: usize) -> Self {
        Self::from_ratio(q.numer(), q.denom(), bits)
    }

    pub fn from_f64(x: f64, bits: usize) -> Self {
        let f = Fb::try_from(x).expect("finite f64");
        Self::from_fb(f, bits)
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn to_f64(&self) -> f64 {
        self.v.to_f64().value()
    }

    pub fn abs(&self) -> Self {
        if self.v < Fb::ZERO {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.v == Fb::ZERO
    }

    fn wrap(&self, v: Fb) -> Self {
        BigFloat { v, bits: self.bits }
    }
}

impl Add for BigFloat {
    type Output = BigFloat;
    fn add(self, o: BigFloat) -> BigFloat {
        let bits = self.bits.max(o.bits);
        BigFloat { v: self.v + o.v, bits }
    }
}

impl Sub for BigFloat {
    type Output = BigFloat;
    fn sub(self, o: BigFloat) -> BigFloat {
        let bits = self.bits.max(o.bits);
        BigFloat { v: self.v - o.v, bits }
    }
}

impl Mul for BigFloat {
    type Output = BigFloat;
    fn mul(self, o: BigFloat) -> BigFloat {
        let bits = self.bits.max(o.bits);
        BigFloat { v: self.v * o.v, bits }
    }
}

impl Div for BigFloat {
    type Output = BigFloat;
    fn div(self, o: BigFloat) -> BigFloat {
        let bits = self.bits.max(o.bits);
        BigFloat { v: self.v / o.v, bits }
    }
}

impl<'a> Add<&'a BigFloat> for &'a BigFloat {
    type Output = BigFloat;
    fn add(self, o: &BigFloat) -> BigFloat {
        BigFloat { v: &self.v + &o.v, bits: self.bits.max(o.bits) }
    }
}

impl<'a> Sub<&'a BigFloat> for &'a BigFloat {
    type Output = BigFloat;
    fn sub(self, o: &BigFloat) -> BigFloat {
        BigFloat { v: &self.v - &o.v, bits: self.bits.max(o.bits) }
    }
}

impl<'a> Mul<&'a BigFloat> for &'a BigFloat {
    type Output = BigFloat;
    fn mul(self, o: &BigFloat) -> BigFloat {
        BigFloat { v: &self.v * &o.v, bits: self.bits.max(o.bits) }
    }
}

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        let bits = self.bits;
        BigFloat { v: -self.v, bits }
    }
}

impl Scalar for BigFloat {
    const EXACT: bool = false;
    fn zero_like(&self) -> Self {
        self.wrap(Fb::ZERO.with_precision(self.bits).value())
    }
    fn from_i64_like(&self, v: i64) -> Self {
        BigFloat::from_i64(v, self.bits)
    }
    fn is_zero_val(&self) -> bool {
        self.is_zero()
    }
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
    fn to_f64_val(&self) -> f64 {
        self.to_f64()
    }
}

/// Greatest common divisor helper used when normalising integer tables.
pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}
