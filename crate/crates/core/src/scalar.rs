//! Ball arithmetic on arbitrary-precision floats.
//!
//! A [`RealScalar`] is a midpoint at a configurable binary precision together
//! with an `f64` error radius. Every operation widens the radius by the
//! propagated input error plus the rounding error of the midpoint, so
//! `|true value - midpoint| <= radius` holds for results built from exact
//! inputs.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Working precision used when the caller does not ask for another one.
pub const DEFAULT_PRECISION: usize = 128;

/// Smallest precision accepted anywhere in the crate.
pub const MIN_PRECISION: usize = 53;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Inflate a nonnegative f64 bound so that it stays an upper bound after the
/// f64 operation that produced it.
#[inline]
fn up(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE
    }
}

fn pow2(e: i32) -> f64 {
    if e < -1074 {
        0.0
    } else if e > 1023 {
        f64::INFINITY
    } else {
        2f64.powi(e)
    }
}

/// Nearest-ish f64 of a BigFloat (relative error below 2^-52).
fn big_to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let Some((words, _, sign, exp, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let n = words.len();
    if n == 0 || x.is_zero() {
        return 0.0;
    }
    let top = words[n - 1] as f64;
    let next = if n >= 2 { words[n - 2] as f64 / 18446744073709551616.0 } else { 0.0 };
    let mag = (top + next) * pow2(exp - 64);
    if sign == Sign::Neg {
        -mag
    } else {
        mag
    }
}

/// Upper bound on the rounding error of a result `z` computed at precision `p`.
fn rounding_bound(z: &BigFloat, p: usize) -> f64 {
    if !z.inexact() {
        return 0.0;
    }
    let m = big_to_f64(z).abs();
    up(m * pow2(1 - p as i32))
}

fn bigint_to_big(n: &BigInt, p: usize) -> (BigFloat, f64) {
    if let Some(v) = n.to_i64() {
        let b = BigFloat::from_i64(v, p.max(64));
        let b = if p < 64 { b.add(&BigFloat::from_i64(0, p), p, RM) } else { b };
        let err = if n.bits() as usize > p { rounding_bound(&b, p) } else { 0.0 };
        return (b, err);
    }
    let b = with_consts(|cc| BigFloat::parse(&n.to_string(), Radix::Dec, p, RM, cc));
    let err = if n.bits() as usize > p { rounding_bound(&b, p) } else { 0.0 };
    (b, err)
}

/// Parse a decimal literal (`-12.5e-3`) or a fraction (`3/10`, `1.5/7`) into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_decimal(num)?;
        let d = parse_decimal(den)?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in '{text}'")));
        }
        return Ok(n / d);
    }
    parse_decimal(s)
}

fn parse_decimal(text: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("malformed number '{text}'"));
    let s = text.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits.is_empty() { "0".to_string() } else { digits };
    let mut n: BigInt = digits.parse().map_err(|_| bad())?;
    if neg {
        n = -n;
    }
    let shift = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let r = if shift >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-shift) as usize))
    };
    Ok(r)
}

/// A real number known to lie within `radius` of `value`.
#[derive(Clone)]
pub struct RealScalar {
    value: BigFloat,
    radius: f64,
    prec: usize,
}

impl RealScalar {
    fn raw(value: BigFloat, radius: f64, prec: usize) -> Self {
        let radius = if radius.is_nan() { f64::INFINITY } else { radius };
        RealScalar { value, radius, prec }
    }

    pub fn zero(prec: usize) -> Self {
        Self::from_int(0, prec)
    }

    pub fn one(prec: usize) -> Self {
        Self::from_int(1, prec)
    }

    pub fn from_int(n: i64, prec: usize) -> Self {
        let (v, err) = bigint_to_big(&BigInt::from(n), prec);
        Self::raw(v, err, prec)
    }

    /// Exact for finite `x` whenever `prec >= 53`.
    pub fn from_f64(x: f64, prec: usize) -> Self {
        let v = BigFloat::from_f64(x, prec.max(64));
        let v = v.add(&BigFloat::from_i64(0, prec), prec, RM);
        let err = if prec < 53 { rounding_bound(&v, prec) } else { 0.0 };
        Self::raw(v, err, prec)
    }

    pub fn from_ratio(num: i64, den: i64, prec: usize) -> Self {
        Self::from_rational(&BigRational::new(BigInt::from(num), BigInt::from(den)), prec)
    }

    pub fn from_rational(r: &BigRational, prec: usize) -> Self {
        let (n, en) = bigint_to_big(r.numer(), prec);
        if r.denom().is_one() {
            return Self::raw(n, en, prec);
        }
        let (d, ed) = bigint_to_big(r.denom(), prec);
        let num = Self::raw(n, en, prec);
        let den = Self::raw(d, ed, prec);
        &num / &den
    }

    /// Parse `"p/q"` or a decimal literal exactly, then round to `prec` bits.
    pub fn parse(text: &str, prec: usize) -> Result<Self> {
        Ok(Self::from_rational(&parse_rational(text)?, prec))
    }

    /// Widen the radius by `extra` (which must be nonnegative).
    pub fn widen(mut self, extra: f64) -> Self {
        self.radius = up(self.radius + extra.abs());
        self
    }

    /// Same midpoint, radius reset to `radius`.
    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius.abs();
        self
    }

    /// Re-round to another precision.
    pub fn to_precision(&self, prec: usize) -> Self {
        let v = self.value.add(&BigFloat::from_i64(0, prec), prec, RM);
        let err = if prec < self.prec { rounding_bound(&v, prec) } else { 0.0 };
        Self::raw(v, up(self.radius + err), prec)
    }

    pub fn value(&self) -> &BigFloat {
        &self.value
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn to_f64(&self) -> f64 {
        big_to_f64(&self.value)
    }

    /// An f64 that is certainly `<=` the true value.
    pub fn lower_f64(&self) -> f64 {
        let m = self.to_f64();
        m - up(self.radius + m.abs() * 2.0 * f64::EPSILON)
    }

    /// An f64 that is certainly `>=` the true value.
    pub fn upper_f64(&self) -> f64 {
        let m = self.to_f64();
        m + up(self.radius + m.abs() * 2.0 * f64::EPSILON)
    }

    /// Upper bound on `|x|` for every `x` in the ball.
    pub fn mag(&self) -> f64 {
        up(self.to_f64().abs() * (1.0 + 2.0 * f64::EPSILON) + self.radius)
    }

    fn prec_with(&self, other: &Self) -> usize {
        self.prec.max(other.prec)
    }

    pub fn abs(&self) -> Self {
        Self::raw(self.value.abs(), self.radius, self.prec)
    }

    /// Certified sign: `None` when the ball contains zero and is not exactly zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.value.is_zero() {
            return if self.radius == 0.0 { Some(Ordering::Equal) } else { None };
        }
        let m = self.to_f64();
        if m.abs() * (1.0 - 4.0 * f64::EPSILON) > self.radius {
            Some(if m > 0.0 { Ordering::Greater } else { Ordering::Less })
        } else {
            None
        }
    }

    /// Certified comparison; `None` when the balls overlap.
    pub fn compare(&self, other: &Self) -> Option<Ordering> {
        (self - other).sign()
    }

    pub fn certainly_lt(&self, other: &Self) -> bool {
        self.compare(other) == Some(Ordering::Less)
    }

    pub fn certainly_gt(&self, other: &Self) -> bool {
        self.compare(other) == Some(Ordering::Greater)
    }

    /// Compare midpoints only, ignoring radii.
    pub fn cmp_value(&self, other: &Self) -> Ordering {
        match self.value.cmp(&other.value) {
            Some(c) if c < 0 => Ordering::Less,
            Some(c) if c > 0 => Ordering::Greater,
            _ => Ordering::Equal,
        }
    }

    /// Upper bound on the distance between the two midpoints plus both radii.
    pub fn distance_bound(&self, other: &Self) -> f64 {
        (self - other).mag()
    }

    pub fn midpoint(a: &Self, b: &Self) -> Self {
        let p = a.prec_with(b);
        let s = a.value.add(&b.value, p + 2, RM);
        let half = BigFloat::from_f64(0.5, 64);
        let m = s.mul(&half, p, RM);
        let err = rounding_bound(&s, p + 2) + rounding_bound(&m, p) + (a.radius + b.radius) / 2.0;
        Self::raw(m, up(err), p)
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut result = Self::one(self.prec);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        if other.sign().is_none() {
            return Err(Error::Precision("division by a ball containing zero".into()));
        }
        Ok(self / other)
    }

    pub fn sqrt(&self) -> Result<Self> {
        let lo = self.lower_f64();
        if self.upper_f64() < 0.0 {
            return Err(Error::Domain("square root of a negative number".into()));
        }
        let p = self.prec;
        let v = if self.value.is_negative() { BigFloat::from_i64(0, p) } else { self.value.sqrt(p, RM) };
        let prop = if self.radius == 0.0 {
            0.0
        } else if lo > 0.0 {
            self.radius / (2.0 * lo.sqrt())
        } else {
            self.radius.sqrt() + self.to_f64().abs().sqrt()
        };
        Ok(Self::raw(v.clone(), up(prop + rounding_bound(&v, p)), p))
    }

    /// Natural logarithm.
    pub fn ln(&self) -> Result<Self> {
        let lo = self.lower_f64();
        if lo <= 0.0 {
            return Err(Error::Domain("logarithm of a ball that reaches zero".into()));
        }
        let p = self.prec;
        if self.radius == 0.0 && self.value == BigFloat::from_i64(1, p) {
            return Ok(Self::zero(p));
        }
        let v = with_consts(|cc| self.value.ln(p + 8, RM, cc));
        let v = v.add(&BigFloat::from_i64(0, p), p, RM);
        // ln is evaluated at p+8 bits, so its own error is below one ulp at p.
        let err = self.radius / lo + 2.0 * rounding_bound(&v, p) + pow2(-(p as i32));
        Ok(Self::raw(v, up(err), p))
    }

    /// Number of significant decimal digits that `prec` bits carry, minus two.
    pub fn default_digits(prec: usize) -> usize {
        ((prec as f64 * std::f64::consts::LOG10_2).ceil() as usize).saturating_sub(2).max(1)
    }

    /// Plain decimal rendering of the midpoint with `sig` significant digits.
    pub fn to_decimal_string(&self, sig: usize) -> String {
        format_decimal(&self.value, sig)
    }

    /// Decimal rendering with the default number of digits for the precision.
    pub fn to_decimal(&self) -> String {
        self.to_decimal_string(Self::default_digits(self.prec))
    }

    /// True when `self` and `other` certainly agree within `tol`.
    pub fn within(&self, other: &Self, tol: f64) -> bool {
        self.distance_bound(other) <= tol
    }
}

fn format_decimal(x: &BigFloat, sig: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_inf() {
        return if x.is_inf_pos() { "inf".into() } else { "-inf".into() };
    }
    let extra = with_consts(|cc| x.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into());
    let (neg, body) = match extra.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, extra.as_str()),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().unwrap_or(0)),
        None => (body, 0),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    let mut digits: Vec<u8> = ip.bytes().chain(fp.bytes()).map(|b| b - b'0').collect();
    // position of the decimal point relative to the start of `digits`
    let mut point = ip.len() as i64 + exp;
    while digits.len() > 1 && digits[0] == 0 {
        digits.remove(0);
        point -= 1;
    }
    if digits.len() > sig {
        let round_up = digits[sig] >= 5;
        digits.truncate(sig);
        if round_up {
            let mut i = sig;
            loop {
                if i == 0 {
                    digits.insert(0, 1);
                    digits.pop();
                    point += 1;
                    break;
                }
                i -= 1;
                if digits[i] == 9 {
                    digits[i] = 0;
                } else {
                    digits[i] += 1;
                    break;
                }
            }
        }
    }
    while digits.len() < sig {
        digits.push(0);
    }
    let ds: String = digits.iter().map(|d| char::from(b'0' + d)).collect();
    let sign = if neg { "-" } else { "" };
    if (-8..=24).contains(&point) {
        if point <= 0 {
            format!("{sign}0.{}{}", "0".repeat((-point) as usize), ds)
        } else if point as usize >= ds.len() {
            format!("{sign}{}{}", ds, "0".repeat(point as usize - ds.len()))
        } else {
            let (a, b) = ds.split_at(point as usize);
            format!("{sign}{a}.{b}")
        }
    } else {
        let (a, b) = ds.split_at(1);
        format!("{sign}{a}.{b}e{}", point - 1)
    }
}

impl fmt::Debug for RealScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {:.3e}", self.to_decimal_string(20), self.radius)
    }
}

impl fmt::Display for RealScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => f.write_str(&self.to_decimal_string(p.max(1))),
            None => f.write_str(&self.to_decimal()),
        }
    }
}

impl Serialize for RealScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RealScalar", 2)?;
        st.serialize_field("value", &self.to_decimal())?;
        st.serialize_field("radius", &format!("{:.3e}", self.radius))?;
        st.end()
    }
}

impl Add for &RealScalar {
    type Output = RealScalar;
    fn add(self, rhs: &RealScalar) -> RealScalar {
        let p = self.prec_with(rhs);
        let v = self.value.add(&rhs.value, p, RM);
        let err = self.radius + rhs.radius + rounding_bound(&v, p);
        RealScalar::raw(v, up(err), p)
    }
}

impl Sub for &RealScalar {
    type Output = RealScalar;
    fn sub(self, rhs: &RealScalar) -> RealScalar {
        let p = self.prec_with(rhs);
        let v = self.value.sub(&rhs.value, p, RM);
        let err = self.radius + rhs.radius + rounding_bound(&v, p);
        RealScalar::raw(v, up(err), p)
    }
}

impl Mul for &RealScalar {
    type Output = RealScalar;
    fn mul(self, rhs: &RealScalar) -> RealScalar {
        let p = self.prec_with(rhs);
        let v = self.value.mul(&rhs.value, p, RM);
        let a = big_to_f64(&self.value).abs();
        let b = big_to_f64(&rhs.value).abs();
        let prop = if self.radius == 0.0 && rhs.radius == 0.0 {
            0.0
        } else {
            up(a * rhs.radius) + up(b * self.radius) + up(self.radius * rhs.radius)
        };
        RealScalar::raw(v.clone(), up(prop + rounding_bound(&v, p)), p)
    }
}

impl Div for &RealScalar {
    type Output = RealScalar;
    fn div(self, rhs: &RealScalar) -> RealScalar {
        let p = self.prec_with(rhs);
        let v = self.value.div(&rhs.value, p, RM);
        let b = big_to_f64(&rhs.value).abs();
        let q = big_to_f64(&v).abs();
        let denom = b * (1.0 - 4.0 * f64::EPSILON) - rhs.radius;
        let prop = if self.radius == 0.0 && rhs.radius == 0.0 {
            0.0
        } else if denom <= 0.0 {
            f64::INFINITY
        } else {
            up((self.radius + up(q * rhs.radius)) / denom)
        };
        RealScalar::raw(v.clone(), up(prop + rounding_bound(&v, p)), p)
    }
}

impl Neg for &RealScalar {
    type Output = RealScalar;
    fn neg(self) -> RealScalar {
        RealScalar::raw(-&self.value, self.radius, self.prec)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RealScalar {
            type Output = RealScalar;
            fn $m(self, rhs: RealScalar) -> RealScalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&RealScalar> for RealScalar {
            type Output = RealScalar;
            fn $m(self, rhs: &RealScalar) -> RealScalar {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for RealScalar {
    type Output = RealScalar;
    fn neg(self) -> RealScalar {
        -&self
    }
}

/// A closed interval with certified endpoints.
#[derive(Clone, Debug, Serialize)]
pub struct Interval {
    pub lo: RealScalar,
    pub hi: RealScalar,
}

impl Interval {
    pub fn new(lo: RealScalar, hi: RealScalar) -> Self {
        Interval { lo, hi }
    }

    pub fn width(&self) -> RealScalar {
        &self.hi - &self.lo
    }
}

/// Exact rational as a `(numerator, denominator)` pair of f64, for display only.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    if r.is_negative() && n > 0.0 {
        -n / d
    } else {
        n / d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: usize = DEFAULT_PRECISION;

    #[test]
    fn parse_fraction_and_decimal() {
        let a = RealScalar::parse("1/4", P).unwrap();
        assert_eq!(a.to_f64(), 0.25);
        assert_eq!(a.radius(), 0.0);
        let b = RealScalar::parse("-2.5e-1", P).unwrap();
        assert_eq!(b.to_f64(), -0.25);
        let c = RealScalar::parse("3/10", P).unwrap();
        assert!((c.to_f64() - 0.3).abs() < 1e-16);
        assert!(c.radius() < 1e-37);
        assert!(RealScalar::parse("1/0", P).is_err());
        assert!(RealScalar::parse("abc", P).is_err());
        assert!(RealScalar::parse("", P).is_err());
    }

    #[test]
    fn arithmetic_keeps_true_value_inside() {
        let third = RealScalar::from_ratio(1, 3, P);
        let three = RealScalar::from_int(3, P);
        let one = &third * &three;
        let diff = &one - &RealScalar::one(P);
        assert!(diff.sign().is_none() || diff.to_f64().abs() <= diff.radius());
        assert!(diff.radius() < 1e-36);
    }

    #[test]
    fn sign_and_compare() {
        let a = RealScalar::from_ratio(1, 3, P);
        let b = RealScalar::from_ratio(1, 4, P);
        assert!(b.certainly_lt(&a));
        assert_eq!(a.compare(&a.clone().widen(1e-3)), None);
        assert_eq!(RealScalar::zero(P).sign(), Some(Ordering::Equal));
    }

    #[test]
    fn ln_and_sqrt() {
        let x = RealScalar::from_int(9, P);
        let l = x.ln().unwrap();
        assert!((l.to_f64() - 9f64.ln()).abs() < 1e-15);
        let s = x.sqrt().unwrap();
        assert!(s.within(&RealScalar::from_int(3, P), 1e-30));
        assert!(RealScalar::zero(P).ln().is_err());
    }

    #[test]
    fn decimal_rendering() {
        let a = RealScalar::from_ratio(1, 3, P);
        assert_eq!(a.to_decimal_string(5), "0.33333");
        let b = RealScalar::from_ratio(2, 3, P);
        assert_eq!(b.to_decimal_string(3), "0.667");
        assert_eq!(RealScalar::from_int(-12, P).to_decimal_string(4), "-12.00");
        assert_eq!(RealScalar::from_ratio(999999, 1000000, P).to_decimal_string(3), "1.00");
        let d = RealScalar::default_digits(128);
        assert_eq!(d, 37);
        assert_eq!(a.to_decimal().len(), 2 + 37);
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = RealScalar::parse("0.3", P).unwrap();
        let p5 = x.powi(5);
        assert!((p5.to_f64() - 0.3f64.powi(5)).abs() < 1e-17);
        assert_eq!(x.powi(0).to_f64(), 1.0);
    }
}
