//! Scalar abstraction so the harmonic-extension and spline machinery can run
//! either in f64 or in exact rationals.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(num: i64, den: u64) -> Self;
    fn to_f64(&self) -> f64;

    fn from_int(k: i64) -> Self {
        Self::from_ratio(k, 1)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_ratio(num: i64, den: u64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }
    fn one() -> Self {
        BigRational::from_integer(BigInt::from(1))
    }
    fn from_ratio(num: i64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).expect("rational out of f64 range")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_roundtrip() {
        assert_eq!(f64::from_ratio(3, 4), 0.75);
        assert_eq!(Scalar::to_f64(&BigRational::from_ratio(3, 4)), 0.75);
        assert_eq!(Scalar::to_f64(&BigRational::from_ratio(-7, 2)), -3.5);
    }
}
