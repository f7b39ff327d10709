//! Fixed-point decimals with six fractional digits, and the necessity
//! degrees built on top of them.
//!
//! Values are stored as an integer count of millionths, so every value that
//! is written with at most six fractional digits is represented exactly and
//! comparisons are total. Multiplication and division round half-to-even
//! back onto the six-digit grid.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Rem, Sub, SubAssign};
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of fractional digits carried by [`Decimal`].
pub const FRACTION_DIGITS: u32 = 6;

const SCALE: i64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecimalError {
    #[error("invalid decimal literal `{0}`")]
    Syntax(String),
    #[error("`{0}` has more than six fractional digits")]
    Precision(String),
    #[error("degree {0} is outside [0, 1]")]
    OutOfRange(String),
    #[error("decimal overflow")]
    Overflow,
}

/// A signed fixed-point number with exactly six fractional digits.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decimal(i64);

/// Divides and rounds half-to-even.
fn div_half_even(num: i128, den: i128) -> i128 {
    debug_assert!(den != 0);
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    let q = num.div_euclid(den);
    let r = num.rem_euclid(den);
    match (2 * r).cmp(&den) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q % 2 == 0 {
                q
            } else {
                q + 1
            }
        }
    }
}

fn narrow(v: i128) -> Option<Decimal> {
    i64::try_from(v).ok().map(Decimal)
}

impl Decimal {
    pub const ZERO: Decimal = Decimal(0);
    pub const ONE: Decimal = Decimal(SCALE);

    /// Builds a decimal from a count of millionths.
    pub const fn from_scaled(raw: i64) -> Self {
        Decimal(raw)
    }

    /// The underlying count of millionths.
    pub const fn scaled(self) -> i64 {
        self.0
    }

    pub const fn from_int(v: i64) -> Self {
        Decimal(v * SCALE)
    }

    /// Converts a float that is already on the six-digit grid (up to float
    /// noise); anything finer is rejected rather than silently rounded.
    pub fn from_f64_exact(x: f64) -> Result<Self, DecimalError> {
        if !x.is_finite() {
            return Err(DecimalError::Syntax(x.to_string()));
        }
        let scaled = x * SCALE as f64;
        let rounded = scaled.round();
        if (scaled - rounded).abs() > 1e-6 * rounded.abs().max(1.0) {
            return Err(DecimalError::Precision(x.to_string()));
        }
        if rounded.abs() >= i64::MAX as f64 {
            return Err(DecimalError::Overflow);
        }
        Ok(Decimal(rounded as i64))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    pub fn abs(self) -> Self {
        Decimal(self.0.abs())
    }

    pub fn is_integer(self) -> bool {
        self.0 % SCALE == 0
    }

    /// Rounds half-to-even to `digits` fractional digits (`digits <= 6`).
    pub fn round_dp(self, digits: u32) -> Self {
        if digits >= FRACTION_DIGITS {
            return self;
        }
        let unit = 10i128.pow(FRACTION_DIGITS - digits);
        Decimal((div_half_even(self.0 as i128, unit) * unit) as i64)
    }

    pub fn checked_add(self, rhs: Self) -> Option<Self> {
        self.0.checked_add(rhs.0).map(Decimal)
    }

    pub fn checked_sub(self, rhs: Self) -> Option<Self> {
        self.0.checked_sub(rhs.0).map(Decimal)
    }

    pub fn checked_mul(self, rhs: Self) -> Option<Self> {
        narrow(div_half_even(self.0 as i128 * rhs.0 as i128, SCALE as i128))
    }

    pub fn checked_div(self, rhs: Self) -> Option<Self> {
        if rhs.0 == 0 {
            return None;
        }
        narrow(div_half_even(self.0 as i128 * SCALE as i128, rhs.0 as i128))
    }

    /// Exact rational quotient rounded half-to-even onto the grid.
    pub fn from_ratio(num: i128, den: i128) -> Option<Self> {
        Decimal::from_ratio_dp(num, den, FRACTION_DIGITS)
    }

    /// Exact rational quotient rounded half-to-even, in one step, to
    /// `digits` fractional digits (`digits <= 6`).
    pub fn from_ratio_dp(num: i128, den: i128, digits: u32) -> Option<Self> {
        if den == 0 || digits > FRACTION_DIGITS {
            return None;
        }
        let q = div_half_even(num.checked_mul(10i128.pow(digits))?, den);
        narrow(q.checked_mul(10i128.pow(FRACTION_DIGITS - digits))?)
    }
}

impl fmt::Display for Decimal {
    /// Trailing zeros are trimmed but one fractional digit is always kept:
    /// `0.968`, `1.0`, `-2.5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let int = abs / SCALE as u64;
        let frac = abs % SCALE as u64;
        let mut digits = format!("{frac:06}");
        while digits.len() > 1 && digits.ends_with('0') {
            digits.pop();
        }
        let body = format!("{sign}{int}.{digits}");
        f.pad(&body)
    }
}

impl fmt::Debug for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Decimal {
    type Err = DecimalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || DecimalError::Syntax(s.to_string());
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(syntax());
        }
        if body.contains('.') && frac_part.is_empty() {
            return Err(syntax());
        }
        if !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(syntax());
        }
        let trimmed = frac_part.trim_end_matches('0');
        if trimmed.len() > FRACTION_DIGITS as usize {
            return Err(DecimalError::Precision(s.to_string()));
        }
        let int: i64 = int_part.parse().map_err(|_| DecimalError::Overflow)?;
        let mut frac: i64 = 0;
        for (i, b) in trimmed.bytes().enumerate() {
            frac += i64::from(b - b'0') * 10i64.pow(FRACTION_DIGITS - 1 - i as u32);
        }
        let raw = int
            .checked_mul(SCALE)
            .and_then(|v| v.checked_add(frac))
            .ok_or(DecimalError::Overflow)?;
        Ok(Decimal(if negative { -raw } else { raw }))
    }
}

impl Add for Decimal {
    type Output = Decimal;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(rhs).expect("decimal overflow")
    }
}

impl Sub for Decimal {
    type Output = Decimal;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(rhs).expect("decimal overflow")
    }
}

impl Mul for Decimal {
    type Output = Decimal;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(rhs).expect("decimal overflow")
    }
}

impl Div for Decimal {
    type Output = Decimal;
    fn div(self, rhs: Self) -> Self {
        self.checked_div(rhs).expect("decimal division by zero or overflow")
    }
}

impl Rem for Decimal {
    type Output = Decimal;
    fn rem(self, rhs: Self) -> Self {
        Decimal(self.0 % rhs.0)
    }
}

impl Neg for Decimal {
    type Output = Decimal;
    fn neg(self) -> Self {
        Decimal(-self.0)
    }
}

impl AddAssign for Decimal {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for Decimal {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl Sum for Decimal {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Decimal::ZERO, Add::add)
    }
}

impl From<i32> for Decimal {
    fn from(v: i32) -> Self {
        Decimal::from_int(v.into())
    }
}

impl num_traits::Zero for Decimal {
    fn zero() -> Self {
        Decimal::ZERO
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl num_traits::One for Decimal {
    fn one() -> Self {
        Decimal::ONE
    }
}

impl num_traits::Num for Decimal {
    type FromStrRadixErr = DecimalError;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err(DecimalError::Syntax(s.to_string()));
        }
        s.parse()
    }
}

impl num_traits::ToPrimitive for Decimal {
    fn to_i64(&self) -> Option<i64> {
        Some(self.0 / SCALE)
    }
    fn to_u64(&self) -> Option<u64> {
        u64::try_from(self.0 / SCALE).ok()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(Decimal::to_f64(*self))
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_integer() {
            serializer.serialize_i64(self.0 / SCALE)
        } else {
            serializer.serialize_f64(self.to_f64())
        }
    }
}

struct DecimalVisitor;

impl Visitor<'_> for DecimalVisitor {
    type Value = Decimal;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or decimal string with at most six fractional digits")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Decimal, E> {
        v.checked_mul(SCALE)
            .map(Decimal)
            .ok_or_else(|| E::custom(DecimalError::Overflow))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Decimal, E> {
        i64::try_from(v)
            .map_err(|_| E::custom(DecimalError::Overflow))
            .and_then(|v| self.visit_i64(v))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Decimal, E> {
        Decimal::from_f64_exact(v).map_err(E::custom)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Decimal, E> {
        v.parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(DecimalVisitor)
    }
}

/// A necessity (or possibility) degree: a [`Decimal`] confined to `[0, 1]`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Degree(Decimal);

impl Degree {
    pub const ZERO: Degree = Degree(Decimal::ZERO);
    pub const ONE: Degree = Degree(Decimal::ONE);

    pub fn new(value: Decimal) -> Result<Self, DecimalError> {
        if value < Decimal::ZERO || value > Decimal::ONE {
            return Err(DecimalError::OutOfRange(value.to_string()));
        }
        Ok(Degree(value))
    }

    pub fn value(self) -> Decimal {
        self.0
    }

    /// `1 - self`.
    pub fn complement(self) -> Degree {
        Degree(Decimal::ONE - self.0)
    }

    /// Product rounded half-to-even; stays in `[0, 1]`.
    pub fn product(self, other: Degree) -> Degree {
        Degree(self.0 * other.0)
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64()
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl FromStr for Degree {
    type Err = DecimalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Degree::new(s.parse()?)
    }
}

impl TryFrom<Decimal> for Degree {
    type Error = DecimalError;

    fn try_from(value: Decimal) -> Result<Self, Self::Error> {
        Degree::new(value)
    }
}

impl From<Degree> for Decimal {
    fn from(d: Degree) -> Self {
        d.0
    }
}

impl Serialize for Degree {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Degree {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Decimal::deserialize(deserializer)?;
        Degree::new(value).map_err(de::Error::custom)
    }
}
