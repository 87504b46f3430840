//! Thin wrapper over `astro_float::BigFloat` with explicit precision on every operation.

use std::cmp::Ordering;

use astro_float::{BigFloat, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::exact::log2_rational;

const RM: RoundingMode = RoundingMode::ToEven;

/// A binary floating-point number of arbitrary precision. Every value is an exact dyadic
/// rational, so conversion back to `BigRational` is lossless.
#[derive(Clone, Debug)]
pub struct Real(BigFloat);

impl Real {
    pub fn zero(bits: usize) -> Self {
        Self(BigFloat::new(bits))
    }

    pub fn one(bits: usize) -> Self {
        Self(BigFloat::from_u64(1, bits))
    }

    pub fn from_i64(v: i64, bits: usize) -> Self {
        Self(BigFloat::from_i64(v, bits))
    }

    /// Exact for `bits >= 64`.
    pub fn from_f64(v: f64, bits: usize) -> Self {
        assert!(v.is_finite(), "non-finite input");
        Self(BigFloat::from_f64(v, bits.max(64)))
    }

    pub fn from_bigint(x: &BigInt, bits: usize) -> Self {
        let words = x.magnitude().to_u64_digits();
        if words.is_empty() {
            return Self::zero(bits);
        }
        let sign = if x.is_negative() { Sign::Neg } else { Sign::Pos };
        let exponent = i32::try_from(64 * words.len()).expect("integer exceeds exponent range");
        let mut f = BigFloat::from_words(&words, sign, exponent);
        f.set_precision(bits, RM).expect("valid precision");
        Self(f)
    }

    /// Correctly rounded to `bits`.
    pub fn from_rational(x: &BigRational, bits: usize) -> Self {
        let wide = bits + 64;
        let n = Self::from_bigint(x.numer(), wide.max(x.numer().bits() as usize));
        let d = Self::from_bigint(x.denom(), wide.max(x.denom().bits() as usize));
        n.div(&d, bits)
    }

    pub fn add(&self, o: &Self, bits: usize) -> Self {
        Self(self.0.add(&o.0, bits, RM))
    }

    pub fn sub(&self, o: &Self, bits: usize) -> Self {
        Self(self.0.sub(&o.0, bits, RM))
    }

    pub fn mul(&self, o: &Self, bits: usize) -> Self {
        Self(self.0.mul(&o.0, bits, RM))
    }

    pub fn div(&self, o: &Self, bits: usize) -> Self {
        assert!(!o.is_zero(), "division by zero");
        Self(self.0.div(&o.0, bits, RM))
    }

    pub fn sqrt(&self, bits: usize) -> Self {
        if self.is_zero() {
            return Self::zero(bits);
        }
        assert!(!self.is_negative(), "square root of a negative value");
        Self(self.0.sqrt(bits, RM))
    }

    pub fn neg(&self) -> Self {
        Self(self.0.neg())
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.is_zero() && self.0.is_negative()
    }

    /// max(self, 0)
    pub fn clamp_nonnegative(&self) -> Self {
        if self.is_negative() {
            Self(BigFloat::new(self.0.precision().unwrap_or(64)))
        } else {
            self.clone()
        }
    }

    fn parts(&self) -> Option<(BigUint, i64, bool)> {
        if self.is_zero() {
            return None;
        }
        let (words, _, sign, exp, _) = self.0.as_raw_parts().expect("finite value");
        let mantissa =
            BigUint::from_slice(&words.iter().flat_map(|w| [*w as u32, (*w >> 32) as u32]).collect::<Vec<u32>>());
        let shift = exp as i64 - 64 * words.len() as i64;
        Some((mantissa, shift, sign == Sign::Neg))
    }

    /// The exact dyadic rational value.
    pub fn to_rational(&self) -> BigRational {
        let Some((m, shift, neg)) = self.parts() else {
            return BigRational::zero();
        };
        let m = BigInt::from(m);
        let m = if neg { -m } else { m };
        if shift >= 0 {
            BigRational::from_integer(m << shift as usize)
        } else {
            BigRational::new(m, BigInt::one() << (-shift) as usize)
        }
    }

    /// log₂|x|; −∞ for zero.
    pub fn log2(&self) -> f64 {
        let Some((words, _, _, exp, _)) = self.0.as_raw_parts().filter(|_| !self.is_zero()) else {
            return f64::NEG_INFINITY;
        };
        let top = *words.last().expect("nonempty mantissa");
        (top as f64).log2() - 64.0 + exp as f64
    }

    /// Nearest double; underflows to 0.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let l = self.log2();
        let sign = if self.is_negative() { -1.0 } else { 1.0 };
        if !(-1070.0..=1020.0).contains(&l) {
            return sign * l.exp2();
        }
        crate::exact::rational_to_f64(&self.to_rational())
    }

    pub fn precision(&self) -> usize {
        self.0.precision().unwrap_or(0)
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl Real {
    pub fn cmp_value(&self, other: &Self) -> Ordering {
        match self.0.cmp(&other.0).expect("finite values") {
            x if x < 0 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    /// Half away from zero.
    Nearest,
    /// Toward −∞.
    Down,
    /// Toward +∞.
    Up,
}

/// Scientific notation with `sig` significant digits, rounded half away from zero.
/// Deterministic and exact: the rounding is done on the rational value.
pub fn sci_string(x: &BigRational, sig: usize) -> String {
    sci_rounded(x, sig, Rounding::Nearest)
}

/// Scientific notation with `sig` significant digits and the given rounding, so that
/// interval endpoints stay valid bounds.
pub fn sci_rounded(x: &BigRational, sig: usize, mode: Rounding) -> String {
    assert!(sig >= 1);
    if x.is_zero() {
        return "0".to_string();
    }
    let a = x.abs();
    let mut k = (log2_rational(&a) * std::f64::consts::LOG10_2).floor() as i64;
    let ten = BigInt::from(10);
    let lo = num_traits::pow(ten.clone(), sig - 1);
    let hi = &lo * &ten;
    let digits = loop {
        let e = sig as i64 - 1 - k;
        let scaled = if e >= 0 {
            &a * BigRational::from_integer(num_traits::pow(ten.clone(), e as usize))
        } else {
            &a / BigRational::from_integer(num_traits::pow(ten.clone(), (-e) as usize))
        };
        let (q, r) = scaled.numer().div_rem(scaled.denom());
        // Rounding the magnitude up moves a negative value down.
        let away = match (mode, x.is_negative()) {
            (Rounding::Nearest, _) => r.clone() * 2 >= *scaled.denom(),
            (Rounding::Up, false) | (Rounding::Down, true) => !r.is_zero(),
            _ => false,
        };
        let rounded = if away { q + 1 } else { q };
        if rounded >= hi {
            k += 1;
        } else if rounded < lo {
            k -= 1;
        } else {
            break rounded.to_string();
        }
    };
    let trimmed = digits.trim_end_matches('0');
    let (head, tail) = trimmed.split_at(1);
    let sign = if x.is_negative() { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{k}")
    } else {
        format!("{sign}{head}.{tail}e{k}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bigint_round_trip() {
        for v in ["0", "1", "-7", "18446744073709551621", "-340282366920938463463374607431768211457"] {
            let x: BigInt = v.parse().unwrap();
            let r = Real::from_bigint(&x, 256);
            assert_eq!(r.to_rational(), BigRational::from_integer(x));
        }
    }

    #[test]
    fn rational_conversion_is_close() {
        let q = BigRational::new(1.into(), 3.into());
        let r = Real::from_rational(&q, 128);
        let err = (r.to_rational() - &q).abs();
        assert!(err < BigRational::new(1.into(), BigInt::one() << 127usize));
        assert!((r.to_f64() - 1.0 / 3.0).abs() < 1e-16);
        assert!((r.log2() - (1.0f64 / 3.0).log2()).abs() < 1e-12);
    }

    #[test]
    fn sqrt_and_compare() {
        let two = Real::from_i64(2, 256);
        let s = two.sqrt(256);
        assert!((s.to_f64() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.mul(&s, 512).cmp_value(&two), Ordering::Less);
        assert!(Real::from_i64(-3, 64).is_negative());
        assert!(Real::from_i64(-3, 64).clamp_nonnegative().is_zero());
    }

    #[test]
    fn tiny_values_keep_their_logarithm() {
        let q = BigRational::new(1.into(), num_traits::pow(BigInt::from(5), 2187));
        let r = Real::from_rational(&q, 128);
        let expected = -2187.0 * 5f64.log2();
        assert!((r.log2() - expected).abs() < 1e-9);
        assert_eq!(r.to_f64(), 0.0);
    }

    #[test]
    fn scientific_strings() {
        let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(sci_string(&q(1, 1), 6), "1e0");
        assert_eq!(sci_string(&q(-25, 1), 6), "-2.5e1");
        assert_eq!(sci_string(&q(1, 3), 5), "3.3333e-1");
        assert_eq!(sci_string(&q(2, 3), 3), "6.67e-1");
        assert_eq!(sci_string(&q(999_999, 1), 3), "1e6");
        assert_eq!(sci_string(&BigRational::zero(), 3), "0");
    }

    #[test]
    fn directed_rounding_brackets_the_value() {
        let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(sci_rounded(&q(1, 3), 3, Rounding::Down), "3.33e-1");
        assert_eq!(sci_rounded(&q(1, 3), 3, Rounding::Up), "3.34e-1");
        assert_eq!(sci_rounded(&q(-1, 3), 3, Rounding::Down), "-3.34e-1");
        assert_eq!(sci_rounded(&q(-1, 3), 3, Rounding::Up), "-3.33e-1");
        assert_eq!(sci_rounded(&q(1, 4), 3, Rounding::Up), "2.5e-1");
        assert_eq!(sci_rounded(&q(9999, 1), 2, Rounding::Up), "1e4");
    }
}
