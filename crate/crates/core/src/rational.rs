//! Exact non-negative rationals used for rates, duty factors and throughputs.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("denominator must be positive")]
    ZeroDenominator,
    #[error("rational must be non-negative")]
    Negative,
    #[error("cannot parse {0:?} as p/q")]
    Syntax(String),
}

/// A reduced fraction `p/q` with `p >= 0` and `q >= 1`.
///
/// Arithmetic is exact; subtraction panics if the result would be negative
/// (use [`Rational::checked_sub`] where that can happen).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<i64>);

impl Rational {
    pub const ZERO: Rational = Rational(Ratio::new_raw(0, 1));
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));

    pub fn new(numer: u64, denom: u64) -> Result<Self, RationalError> {
        if denom == 0 {
            return Err(RationalError::ZeroDenominator);
        }
        Ok(Rational(Ratio::new(numer as i64, denom as i64)))
    }

    pub fn from_integer(n: u64) -> Self {
        Rational(Ratio::from_integer(n as i64))
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer() as u64
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom() as u64
    }

    pub fn is_zero(&self) -> bool {
        *self.0.numer() == 0
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Integer value if the fraction has denominator 1.
    pub fn to_integer(&self) -> Option<u64> {
        self.is_integer().then(|| self.numer())
    }

    pub fn checked_sub(self, rhs: Rational) -> Option<Rational> {
        let d = self.0 - rhs.0;
        (*d.numer() >= 0).then_some(Rational(d))
    }

    pub fn pow(self, exp: u32) -> Rational {
        (0..exp).map(|_| self).product()
    }

    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = RationalError;

    /// Accepts `p/q` or a bare integer `p`. Decimal notation is rejected.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let syntax = || RationalError::Syntax(s.to_string());
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s, "1"),
        };
        if p.starts_with('-') {
            return Err(RationalError::Negative);
        }
        if !digits(p) || !digits(q) {
            return Err(syntax());
        }
        let p: u64 = p.parse().map_err(|_| syntax())?;
        let q: u64 = q.parse().map_err(|_| syntax())?;
        if p > i64::MAX as u64 || q > i64::MAX as u64 {
            return Err(syntax());
        }
        Rational::new(p, q)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        self.checked_sub(rhs)
            .unwrap_or_else(|| panic!("negative rational: {self} - {rhs}"))
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rational(self.0 / rhs.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.copied().sum()
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ONE, Mul::mul)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a comma-separated list such as `1/6,1/3,1/2`.
pub fn parse_rational_list(s: &str) -> Result<Vec<Rational>, RationalError> {
    s.split(',').map(str::parse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reduces() {
        let r: Rational = "2/4".parse().unwrap();
        assert_eq!((r.numer(), r.denom()), (1, 2));
        assert_eq!("3".parse::<Rational>().unwrap(), Rational::from_integer(3));
        assert_eq!(r.to_string(), "1/2");
        assert_eq!(Rational::ONE.to_string(), "1/1");
    }

    #[test]
    fn rejects_floats_and_garbage() {
        assert!(matches!("0.5".parse::<Rational>(), Err(RationalError::Syntax(_))));
        assert!(matches!("1/0".parse::<Rational>(), Err(RationalError::ZeroDenominator)));
        assert!(matches!("-1/2".parse::<Rational>(), Err(RationalError::Negative)));
        assert!("1/".parse::<Rational>().is_err());
        assert!("".parse::<Rational>().is_err());
    }

    #[test]
    fn exact_arithmetic() {
        let a = Rational::new(1, 6).unwrap();
        let b = Rational::new(1, 3).unwrap();
        let c = Rational::new(1, 2).unwrap();
        assert_eq!(a + b + c, Rational::ONE);
        assert_eq!(Rational::ONE - c, c);
        assert_eq!(b / c, Rational::new(2, 3).unwrap());
        assert_eq!(Rational::new(2, 3).unwrap().pow(2), Rational::new(4, 9).unwrap());
        assert!(a.checked_sub(b).is_none());
    }

    #[test]
    fn serde_as_string() {
        let r = Rational::new(2, 3).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, "\"2/3\"");
        let back: Rational = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
