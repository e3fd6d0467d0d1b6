//! Exact rational arithmetic over `i128`.
//!
//! Every value is kept in canonical form: positive denominator and
//! `gcd(|num|, den) == 1`. Overflow is reported through [`FractionError`],
//! never wrapped.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FractionError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("arithmetic overflow in fraction {0}")]
    Overflow(&'static str),
    #[error("invalid fraction literal `{0}`")]
    Parse(String),
}

pub type FractionResult = Result<Fraction, FractionError>;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fraction {
    num: i128,
    den: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Fraction {
    pub const ZERO: Fraction = Fraction { num: 0, den: 1 };
    pub const ONE: Fraction = Fraction { num: 1, den: 1 };

    pub fn new(num: i128, den: i128) -> FractionResult {
        if den == 0 {
            return Err(FractionError::ZeroDenominator);
        }
        if num == i128::MIN || den == i128::MIN {
            return Err(FractionError::Overflow("new"));
        }
        let g = gcd(num, den).max(1);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        Ok(Fraction { num: n, den: d })
    }

    /// Shorthand for literals known to be valid; panics on a zero denominator.
    pub fn of(num: i128, den: i128) -> Fraction {
        Fraction::new(num, den).expect("valid fraction literal")
    }

    pub fn from_int(n: i128) -> Fraction {
        Fraction { num: n, den: 1 }
    }

    pub fn numer(&self) -> i128 {
        self.num
    }

    pub fn denom(&self) -> i128 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_positive(&self) -> bool {
        self.num > 0
    }

    pub fn checked_add(self, rhs: Fraction) -> FractionResult {
        // a/b + c/d over lcm(b, d) keeps intermediates small
        let g = gcd(self.den, rhs.den);
        let left = self
            .num
            .checked_mul(rhs.den / g)
            .ok_or(FractionError::Overflow("add"))?;
        let right = rhs
            .num
            .checked_mul(self.den / g)
            .ok_or(FractionError::Overflow("add"))?;
        let num = left
            .checked_add(right)
            .ok_or(FractionError::Overflow("add"))?;
        let den = (self.den / g)
            .checked_mul(rhs.den)
            .ok_or(FractionError::Overflow("add"))?;
        Fraction::new(num, den)
    }

    pub fn checked_neg(self) -> FractionResult {
        Ok(Fraction {
            num: self
                .num
                .checked_neg()
                .ok_or(FractionError::Overflow("neg"))?,
            den: self.den,
        })
    }

    pub fn checked_sub(self, rhs: Fraction) -> FractionResult {
        self.checked_add(rhs.checked_neg()?)
    }

    pub fn checked_mul(self, rhs: Fraction) -> FractionResult {
        let g1 = gcd(self.num, rhs.den).max(1);
        let g2 = gcd(rhs.num, self.den).max(1);
        let num = (self.num / g1)
            .checked_mul(rhs.num / g2)
            .ok_or(FractionError::Overflow("mul"))?;
        let den = (self.den / g2)
            .checked_mul(rhs.den / g1)
            .ok_or(FractionError::Overflow("mul"))?;
        Fraction::new(num, den)
    }

    pub fn checked_div(self, rhs: Fraction) -> FractionResult {
        if rhs.num == 0 {
            return Err(FractionError::ZeroDenominator);
        }
        self.checked_mul(Fraction::new(rhs.den, rhs.num)?)
    }

    pub fn checked_mul_int(self, k: i128) -> FractionResult {
        self.checked_mul(Fraction::from_int(k))
    }

    pub fn checked_div_int(self, k: i128) -> FractionResult {
        self.checked_div(Fraction::from_int(k))
    }

    pub fn checked_sum<I: IntoIterator<Item = Fraction>>(iter: I) -> FractionResult {
        iter.into_iter()
            .try_fold(Fraction::ZERO, |acc, f| acc.checked_add(f))
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Least common multiple of positive integers; `None` on overflow.
pub fn lcm(a: i128, b: i128) -> Option<i128> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b).map(i128::abs)
}

impl Default for Fraction {
    fn default() -> Self {
        Fraction::ZERO
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        // denominators are positive so cross-multiplication preserves order;
        // fall back to f64 only if the products overflow (never for faraid sizes)
        match (
            self.num.checked_mul(other.den),
            other.num.checked_mul(self.den),
        ) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => self
                .to_f64()
                .partial_cmp(&other.to_f64())
                .unwrap_or(Ordering::Equal),
        }
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Fraction {
    type Err = FractionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || FractionError::Parse(s.to_string());
        match s.split_once('/') {
            Some((n, d)) => {
                let n: i128 = n.trim().parse().map_err(|_| bad())?;
                let d: i128 = d.trim().parse().map_err(|_| bad())?;
                Fraction::new(n, d)
            }
            None => Ok(Fraction::from_int(s.parse().map_err(|_| bad())?)),
        }
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
