//! Exact rationals used by every geometric predicate.
//!
//! [`Q`] wraps a reduced `i128` ratio and performs checked arithmetic: an
//! overflow aborts loudly instead of wrapping, so a predicate can never
//! silently return a wrong sign.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Q(Ratio<i128>);

/// A point or functional coefficient vector.
pub type QVec = Vec<Q>;

impl Q {
    pub const ZERO: Q = Q(Ratio::new_raw(0, 1));
    pub const ONE: Q = Q(Ratio::new_raw(1, 1));

    pub fn new(numer: i128, denom: i128) -> Q {
        assert!(denom != 0, "zero denominator");
        Q(Ratio::new(numer, denom))
    }

    pub fn int(n: i128) -> Q {
        Q(Ratio::from_integer(n))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn signum(&self) -> i8 {
        match self.numer().cmp(&0) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    pub fn abs(&self) -> Q {
        Q(self.0.abs())
    }

    pub fn floor(&self) -> i128 {
        self.numer().div_euclid(self.denom())
    }

    pub fn ceil(&self) -> i128 {
        -(-self.numer()).div_euclid(self.denom())
    }

    pub fn recip(&self) -> Q {
        assert!(!self.is_zero(), "reciprocal of zero");
        Q(self.0.recip())
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// True when `self * m` is an integer.
    pub fn on_grid(&self, m: u32) -> bool {
        (*self * Q::int(m as i128)).is_integer()
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Q {
    type Err = Error;

    fn from_str(s: &str) -> Result<Q, Error> {
        let bad = || Error::Parse(format!("not a rational: {s:?}"));
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: i128 = n.trim().parse().map_err(|_| bad())?;
                let d: i128 = d.trim().parse().map_err(|_| bad())?;
                if d == 0 {
                    return Err(bad());
                }
                Ok(Q::new(n, d))
            }
            None => s.parse::<i128>().map(Q::int).map_err(|_| bad()),
        }
    }
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Q, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Q {
    fn from(n: i64) -> Q {
        Q::int(n as i128)
    }
}

impl Zero for Q {
    fn zero() -> Q {
        Q::ZERO
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Q {
    fn one() -> Q {
        Q::ONE
    }
}

macro_rules! checked_op {
    ($trait:ident, $method:ident, $checked:ident, $assign_trait:ident, $assign:ident) => {
        impl $trait for Q {
            type Output = Q;
            #[inline]
            fn $method(self, rhs: Q) -> Q {
                Q(self
                    .0
                    .$checked(&rhs.0)
                    .unwrap_or_else(|| panic!("rational overflow in {}", stringify!($method))))
            }
        }
        impl<'a> $trait<&'a Q> for Q {
            type Output = Q;
            #[inline]
            fn $method(self, rhs: &'a Q) -> Q {
                $trait::$method(self, *rhs)
            }
        }
        impl $assign_trait for Q {
            #[inline]
            fn $assign(&mut self, rhs: Q) {
                *self = $trait::$method(*self, rhs);
            }
        }
    };
}

checked_op!(Add, add, checked_add, AddAssign, add_assign);
checked_op!(Sub, sub, checked_sub, SubAssign, sub_assign);
checked_op!(Mul, mul, checked_mul, MulAssign, mul_assign);

impl Div for Q {
    type Output = Q;
    fn div(self, rhs: Q) -> Q {
        assert!(!rhs.is_zero(), "division by zero");
        Q(self.0.checked_div(&rhs.0).expect("rational overflow in div"))
    }
}

impl Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        Q(-self.0)
    }
}

impl Sum for Q {
    fn sum<I: Iterator<Item = Q>>(iter: I) -> Q {
        iter.fold(Q::ZERO, |a, b| a + b)
    }
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

pub fn add(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

pub fn sub(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

pub fn scale(s: Q, a: &[Q]) -> QVec {
    a.iter().map(|x| s * *x).collect()
}

/// Arithmetic mean of a nonempty point set.
pub fn centroid(points: &[QVec]) -> QVec {
    assert!(!points.is_empty(), "centroid of empty set");
    let dim = points[0].len();
    let n = Q::int(points.len() as i128);
    (0..dim)
        .map(|i| points.iter().map(|p| p[i]).sum::<Q>() / n)
        .collect()
}

pub fn qvec(values: &[i64]) -> QVec {
    values.iter().map(|&v| Q::from(v)).collect()
}

pub fn parse_qvec(items: &[String]) -> Result<QVec, Error> {
    items.iter().map(|s| s.parse()).collect()
}

pub fn fmt_qvec(v: &[Q]) -> String {
    let parts: Vec<String> = v.iter().map(|q| q.to_string()).collect();
    format!("({})", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints() {
        let q: Q = "6/-4".parse().unwrap();
        assert_eq!(q, Q::new(-3, 2));
        assert_eq!(q.to_string(), "-3/2");
        assert_eq!("7".parse::<Q>().unwrap().to_string(), "7");
        assert!("1/0".parse::<Q>().is_err());
        assert!("x".parse::<Q>().is_err());
    }

    #[test]
    fn floor_ceil_negative() {
        let q = Q::new(-3, 2);
        assert_eq!(q.floor(), -2);
        assert_eq!(q.ceil(), -1);
        assert_eq!(Q::int(2).floor(), 2);
        assert_eq!(Q::int(2).ceil(), 2);
    }

    #[test]
    fn grid_membership() {
        assert!(Q::new(1, 2).on_grid(2));
        assert!(!Q::new(1, 2).on_grid(1));
        assert!(Q::new(2, 3).on_grid(3));
    }

    #[test]
    #[should_panic(expected = "rational overflow")]
    fn overflow_is_loud() {
        let big = Q::int(i128::MAX / 2);
        let _ = big * Q::int(4);
    }
}
