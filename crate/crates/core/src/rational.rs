//! Exact rationals over `i128` with checked arithmetic.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A fraction in lowest terms with a positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i128,
    den: i128,
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };

    pub fn new(num: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(Error::input("zero denominator"));
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = (num / g, den / g);
        if den < 0 {
            num = num.checked_neg().ok_or(Error::Overflow("rational sign"))?;
            den = den.checked_neg().ok_or(Error::Overflow("rational sign"))?;
        }
        Ok(Rational { num, den })
    }

    pub fn from_int(n: i128) -> Self {
        Rational { num: n, den: 1 }
    }

    pub fn numer(&self) -> i128 {
        self.num
    }

    pub fn denom(&self) -> i128 {
        self.den
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn checked_add(self, rhs: Rational) -> Result<Rational> {
        let l = self.den.lcm(&rhs.den);
        let a = self
            .num
            .checked_mul(l / self.den)
            .ok_or(Error::Overflow("rational add"))?;
        let b = rhs
            .num
            .checked_mul(l / rhs.den)
            .ok_or(Error::Overflow("rational add"))?;
        Rational::new(a.checked_add(b).ok_or(Error::Overflow("rational add"))?, l)
    }

    pub fn checked_sub(self, rhs: Rational) -> Result<Rational> {
        self.checked_add(rhs.checked_neg()?)
    }

    pub fn checked_neg(self) -> Result<Rational> {
        Ok(Rational {
            num: self.num.checked_neg().ok_or(Error::Overflow("rational neg"))?,
            den: self.den,
        })
    }

    pub fn checked_mul(self, rhs: Rational) -> Result<Rational> {
        // Cross-reduce first to keep intermediates small.
        let g1 = self.num.gcd(&rhs.den).max(1);
        let g2 = rhs.num.gcd(&self.den).max(1);
        let num = (self.num / g1)
            .checked_mul(rhs.num / g2)
            .ok_or(Error::Overflow("rational mul"))?;
        let den = (self.den / g2)
            .checked_mul(rhs.den / g1)
            .ok_or(Error::Overflow("rational mul"))?;
        Rational::new(num, den)
    }

    pub fn checked_div(self, rhs: Rational) -> Result<Rational> {
        if rhs.num == 0 {
            return Err(Error::input("division by zero"));
        }
        self.checked_mul(Rational::new(rhs.den, rhs.num)?)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Decimal expansion rounded half away from zero to `places` digits.
    pub fn to_decimal_string(self, places: u32) -> String {
        let scale = 10i128.pow(places);
        let neg = self.num < 0;
        let abs = self.num.unsigned_abs();
        let den = self.den as u128;
        let whole = abs / den;
        let rem = abs % den;
        // rem < den <= i128::MAX, so rem * scale fits as long as scale is small
        // enough; fall back to float formatting otherwise.
        let Some(scaled) = rem.checked_mul(scale as u128) else {
            return format!("{:.*}", places as usize, self.to_f64());
        };
        let mut frac = scaled / den;
        let mut whole = whole;
        if (scaled % den) * 2 >= den {
            frac += 1;
            if frac == scale as u128 {
                frac = 0;
                whole += 1;
            }
        }
        let sign = if neg && (whole != 0 || frac != 0) { "-" } else { "" };
        if places == 0 {
            format!("{sign}{whole}")
        } else {
            format!("{sign}{whole}.{frac:0width$}", width = places as usize)
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n as i128)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational::from_int(n as i128)
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_fractions(self.num, self.den, other.num, other.den)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Compares `a/b` with `c/d` (`b, d > 0`) without overflow by comparing
/// integer parts and recursing on the reciprocals of the remainders.
fn cmp_fractions(a: i128, b: i128, c: i128, d: i128) -> Ordering {
    let (q1, r1) = (a.div_euclid(b), a.rem_euclid(b));
    let (q2, r2) = (c.div_euclid(d), c.rem_euclid(d));
    match q1.cmp(&q2) {
        Ordering::Equal => {}
        ord => return ord,
    }
    match (r1 == 0, r2 == 0) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        // r1/b vs r2/d  <=>  d/r2 vs b/r1
        (false, false) => cmp_fractions(d, r2, b, r1),
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Serialized as `{"num": .., "den": .., "decimal": ".."}`.
impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Rational", 3)?;
        s.serialize_field("num", &self.num)?;
        s.serialize_field("den", &self.den)?;
        s.serialize_field("decimal", &self.to_decimal_string(DECIMAL_PLACES))?;
        s.end()
    }
}

pub const DECIMAL_PLACES: u32 = 6;
