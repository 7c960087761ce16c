//! Exact rationals and decimal big-float reals.
//!
//! Every coefficient and coordinate that enters the library is ingested as a
//! decimal string and stored as a [`Rational`]. [`BigReal`] is a decimal
//! floating-point value that carries its own working precision (significant
//! decimal digits) and rounds half-to-even after every operation.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::{Context, FBig};
use dashu_int::IBig;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{input, Error, Result};

/// Default working precision, in significant decimal digits.
pub const DEFAULT_DIGITS: usize = 60;
/// Smallest precision accepted by [`BigReal`] constructors.
pub const MIN_DIGITS: usize = 30;

/// An exact rational number in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Result<Self> {
        if denom.is_zero() {
            return input("zero denominator");
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// Parses `[+-]digits[.digits]` exactly.
    pub fn parse_decimal(s: &str) -> Result<Self> {
        let t = s.trim();
        let (neg, body) = match t.as_bytes().first() {
            Some(b'-') => (true, &t[1..]),
            Some(b'+') => (false, &t[1..]),
            _ => (false, t),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (body, None),
        };
        let digits_ok = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
        if !digits_ok(int_part) || frac_part.is_some_and(|f| !digits_ok(f)) {
            return input(format!("malformed decimal {s:?}"));
        }
        let frac = frac_part.unwrap_or("");
        let mut numer: BigInt = format!("{int_part}{frac}")
            .parse()
            .map_err(|_| Error::Input(format!("malformed decimal {s:?}")))?;
        if neg {
            numer = -numer;
        }
        let denom = num_traits::pow(BigInt::from(10u32), frac.len());
        Ok(Rational(BigRational::new(numer, denom)))
    }

    /// Parses either a fraction `p/q` or a decimal.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().split_once('/') {
            Some((n, d)) => {
                let n = Rational::parse_decimal(n)?;
                let d = Rational::parse_decimal(d)?;
                if !n.is_integer() || !d.is_integer() {
                    return input(format!("malformed fraction {s:?}"));
                }
                if d.is_zero() {
                    return input(format!("zero denominator in {s:?}"));
                }
                Ok(n / d)
            }
            None => Rational::parse_decimal(s),
        }
    }

    /// The exact value of a finite `f64`.
    pub fn from_f64(v: f64) -> Result<Self> {
        BigRational::from_float(v)
            .map(Rational)
            .ok_or_else(|| Error::Input(format!("non-finite value {v}")))
    }

    /// Exact value of a [`BigReal`] (always a terminating decimal).
    pub fn from_bigreal(v: &BigReal) -> Self {
        v.to_rational()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn pow(&self, e: u32) -> Self {
        Rational(num_traits::pow(self.0.clone(), e as usize))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn to_bigreal(&self, digits: usize) -> Result<BigReal> {
        BigReal::from_rational(self, digits)
    }

    /// Decimal expansion truncated toward zero after `frac_digits` fractional digits.
    pub fn to_decimal_string(&self, frac_digits: usize) -> String {
        let scale = num_traits::pow(BigInt::from(10u32), frac_digits);
        let scaled = self.0.numer() * &scale;
        let q = scaled.abs().div_floor(self.0.denom());
        let mut s = q.to_string();
        if frac_digits > 0 {
            if s.len() <= frac_digits {
                s = format!("{}{}", "0".repeat(frac_digits + 1 - s.len()), s);
            }
            s.insert(s.len() - frac_digits, '.');
        }
        if self.0.is_negative() {
            s.insert(0, '-');
        }
        s
    }

    /// The terminating decimal expansion, when one exists.
    pub fn to_exact_decimal(&self) -> Option<String> {
        let mut d = self.0.denom().clone();
        let mut k = 0usize;
        let two = BigInt::from(2u32);
        let five = BigInt::from(5u32);
        let mut twos = 0usize;
        let mut fives = 0usize;
        while d.is_even() {
            d /= &two;
            twos += 1;
        }
        while (&d % &five).is_zero() {
            d /= &five;
            fives += 1;
        }
        if !d.is_one() {
            return None;
        }
        k = k.max(twos).max(fives);
        Some(self.to_decimal_string(k))
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Rational::parse(s)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Rational;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a decimal or fraction string, or a number")
            }
            fn visit_str<E: serde::de::Error>(self, s: &str) -> std::result::Result<Rational, E> {
                Rational::parse(s).map_err(E::custom)
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
                Ok(Rational::from(v))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
                Ok(Rational(BigRational::from_integer(BigInt::from(v))))
            }
            // the shortest decimal that round-trips, not the binary value
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> std::result::Result<Rational, E> {
                if !v.is_finite() {
                    return Err(E::custom("non-finite number"));
                }
                Rational::parse(&format!("{v}")).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

macro_rules! rational_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational(self.0.$m(rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational(self.0.$m(&rhs.0))
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational((&self.0).$m(rhs.0))
            }
        }
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$m(&rhs.0))
            }
        }
    };
}

rational_binop!(Add, add);
rational_binop!(Sub, sub);
rational_binop!(Mul, mul);
rational_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

type Dec = FBig<HalfEven, 10>;

fn to_ibig(n: &BigInt) -> IBig {
    IBig::from_le_bytes(&n.to_signed_bytes_le())
}

fn to_bigint(n: &IBig) -> BigInt {
    BigInt::from_signed_bytes_le(&n.to_le_bytes())
}

/// Decimal floating-point number with `digits` significant digits,
/// rounded half-to-even after every operation.
///
/// Binary operations run at the larger of the two operand precisions.
#[derive(Clone)]
pub struct BigReal(Dec);

impl BigReal {
    fn check_digits(digits: usize) -> Result<()> {
        if digits < MIN_DIGITS {
            return input(format!("precision {digits} below minimum {MIN_DIGITS}"));
        }
        Ok(())
    }

    pub fn from_rational(q: &Rational, digits: usize) -> Result<Self> {
        Self::check_digits(digits)?;
        Ok(Self::from_rational_unchecked(q, digits))
    }

    pub(crate) fn from_rational_unchecked(q: &Rational, digits: usize) -> Self {
        let ctx = Context::<HalfEven>::new(digits);
        let n = Dec::from(to_ibig(q.numer()));
        let d = Dec::from(to_ibig(q.denom()));
        BigReal(ctx.div(n.repr(), d.repr()).value())
    }

    pub fn from_f64(v: f64, digits: usize) -> Result<Self> {
        let q = Rational::from_f64(v)?;
        Self::from_rational(&q, digits)
    }

    pub fn from_i64(v: i64, digits: usize) -> Result<Self> {
        Self::check_digits(digits)?;
        Ok(BigReal(Dec::from(v).with_precision(digits).value()))
    }

    pub fn zero(digits: usize) -> Self {
        BigReal(Dec::ZERO.with_precision(digits).value())
    }

    pub fn digits(&self) -> usize {
        self.0.precision()
    }

    /// Re-rounds to a new precision.
    pub fn with_digits(&self, digits: usize) -> Self {
        BigReal(self.0.clone().with_precision(digits).value())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    /// Exact rational value of the stored decimal.
    pub fn to_rational(&self) -> Rational {
        let (sig, exp) = self.0.repr().clone().into_parts();
        let sig = to_bigint(&sig);
        let ten = BigInt::from(10u32);
        if exp >= 0 {
            Rational(BigRational::from_integer(
                sig * num_traits::pow(ten, exp as usize),
            ))
        } else {
            Rational(BigRational::new(sig, num_traits::pow(ten, (-exp) as usize)))
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn is_negative(&self) -> bool {
        self.0.sign() == dashu_base::Sign::Negative && !self.0.repr().is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.0.repr().is_zero()
    }

    pub fn sqrt(&self) -> Self {
        let ctx = Context::<HalfEven>::new(self.digits());
        BigReal(ctx.sqrt(self.0.repr()).value())
    }

    pub fn powi(&self, e: u32) -> Self {
        let mut acc = BigReal(Dec::ONE.with_precision(self.digits()).value());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Scientific notation with `sig` significant digits (display only).
    pub fn to_sci(&self, sig: usize) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let r = self.0.clone().with_precision(sig.max(1)).value();
        r.to_string()
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigReal({}; {} digits)", self.0, self.digits())
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl Serialize for BigReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

macro_rules! bigreal_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<BigReal> for BigReal {
            type Output = BigReal;
            fn $m(self, rhs: BigReal) -> BigReal {
                BigReal(self.0.$m(rhs.0))
            }
        }
        impl $tr<&BigReal> for BigReal {
            type Output = BigReal;
            fn $m(self, rhs: &BigReal) -> BigReal {
                BigReal(self.0.$m(&rhs.0))
            }
        }
        impl $tr<BigReal> for &BigReal {
            type Output = BigReal;
            fn $m(self, rhs: BigReal) -> BigReal {
                BigReal((&self.0).$m(rhs.0))
            }
        }
        impl $tr<&BigReal> for &BigReal {
            type Output = BigReal;
            fn $m(self, rhs: &BigReal) -> BigReal {
                BigReal((&self.0).$m(&rhs.0))
            }
        }
    };
}

bigreal_binop!(Add, add);
bigreal_binop!(Sub, sub);
bigreal_binop!(Mul, mul);
bigreal_binop!(Div, div);

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(-self.0)
    }
}

impl Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(-self.0.clone())
    }
}

/// Scalar interface shared by the `f64` fast path and [`BigReal`] polishing.
pub trait Real:
    Clone
    + PartialOrd
    + Send
    + Sync
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
    /// Precision context (unit for `f64`, digit count for [`BigReal`]).
    type Ctx: Copy + Send + Sync + fmt::Debug;

    fn lift(q: &Rational, ctx: Self::Ctx) -> Self;
    fn lift_f64(v: f64, ctx: Self::Ctx) -> Self;
    fn lift_i64(v: i64, ctx: Self::Ctx) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn ctx(&self) -> Self::Ctx;
}

impl Real for f64 {
    type Ctx = ();

    fn lift(q: &Rational, _: ()) -> Self {
        q.to_f64()
    }
    fn lift_f64(v: f64, _: ()) -> Self {
        v
    }
    fn lift_i64(v: i64, _: ()) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn ctx(&self) {}
}

impl Real for BigReal {
    type Ctx = usize;

    fn lift(q: &Rational, digits: usize) -> Self {
        BigReal::from_rational_unchecked(q, digits)
    }
    fn lift_f64(v: f64, digits: usize) -> Self {
        let q = Rational::from_f64(v).unwrap_or_else(|_| Rational::zero());
        BigReal::from_rational_unchecked(&q, digits)
    }
    fn lift_i64(v: i64, digits: usize) -> Self {
        BigReal(Dec::from(v).with_precision(digits).value())
    }
    fn to_f64(&self) -> f64 {
        BigReal::to_f64(self)
    }
    fn abs(&self) -> Self {
        BigReal::abs(self)
    }
    fn sqrt(&self) -> Self {
        BigReal::sqrt(self)
    }
    fn ctx(&self) -> usize {
        self.digits()
    }
}
