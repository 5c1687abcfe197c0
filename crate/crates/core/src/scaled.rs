//! Floating-point values with an extended exponent.
//!
//! Skew-orthogonal polynomials carry factorials like `(2j)!(2j+1)!`, which
//! leave the `f64` range well before the matrix sizes we care about. A
//! [`ScaledValue`] stores `mantissa * 2^exponent` with the mantissa normalized
//! to `[1, 2)` in magnitude and an `i64` exponent, so products and ratios of
//! such quantities stay exact up to ordinary rounding.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, MulAssign, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledValue {
    mantissa: f64,
    exponent: i64,
}

/// Splits a finite, nonzero `x` into `(m, e)` with `x = m * 2^e`, `|m|` in `[1, 2)`.
fn frexp(x: f64) -> (f64, i64) {
    const SUBNORMAL_SHIFT: i32 = 64;
    let (x, shift) = if x.abs() < f64::MIN_POSITIVE {
        (x * 2f64.powi(SUBNORMAL_SHIFT), -(SUBNORMAL_SHIFT as i64))
    } else {
        (x, 0)
    };
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let mantissa_bits = (bits & !(0x7ffu64 << 52)) | (1023u64 << 52);
    (f64::from_bits(mantissa_bits), biased - 1023 + shift)
}

/// `2^e` for exponents where the result is a normal `f64`, else 0 or inf.
fn pow2(e: i64) -> f64 {
    if e > 1023 {
        f64::INFINITY
    } else if e < -1074 {
        0.0
    } else if e < -1022 {
        2f64.powi(-1022) * 2f64.powi((e + 1022) as i32)
    } else {
        f64::from_bits(((e + 1023) as u64) << 52)
    }
}

impl ScaledValue {
    pub const ZERO: ScaledValue = ScaledValue {
        mantissa: 0.0,
        exponent: 0,
    };
    pub const ONE: ScaledValue = ScaledValue {
        mantissa: 1.0,
        exponent: 0,
    };

    /// Normalizes `mantissa * 2^exponent`. Non-finite mantissas are kept as is.
    pub fn new(mantissa: f64, exponent: i64) -> Self {
        if mantissa == 0.0 || !mantissa.is_finite() {
            return ScaledValue {
                mantissa: if mantissa == 0.0 { 0.0 } else { mantissa },
                exponent: 0,
            };
        }
        let (m, e) = frexp(mantissa);
        ScaledValue {
            mantissa: m,
            exponent: exponent + e,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        Self::new(x, 0)
    }

    /// Builds `sign * exp(ln_abs)` without passing through `f64` overflow.
    pub fn from_ln(ln_abs: f64, sign: f64) -> Self {
        if ln_abs == f64::NEG_INFINITY || sign == 0.0 {
            return Self::ZERO;
        }
        let e = (ln_abs / std::f64::consts::LN_2).floor();
        let rest = ln_abs - e * std::f64::consts::LN_2;
        Self::new(sign.signum() * rest.exp(), e as i64)
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    /// Natural-log scale: the value equals `mantissa() * exp(log_scale())`.
    pub fn log_scale(&self) -> f64 {
        self.exponent as f64 * std::f64::consts::LN_2
    }

    pub fn to_f64(&self) -> f64 {
        if self.mantissa == 0.0 || !self.mantissa.is_finite() {
            return self.mantissa;
        }
        // split to avoid spurious overflow of pow2 when the product is representable
        let e = self.exponent;
        if e > 1023 || e < -1022 {
            let half = e / 2;
            self.mantissa * pow2(half) * pow2(e - half)
        } else {
            self.mantissa * pow2(e)
        }
    }

    /// `ln |value|`; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.mantissa == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.mantissa.abs().ln() + self.log_scale()
        }
    }

    pub fn signum(&self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa.signum()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.mantissa.is_finite()
    }

    pub fn abs(&self) -> Self {
        ScaledValue {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    pub fn recip(&self) -> Self {
        Self::ONE / *self
    }

    pub fn sqrt(&self) -> Self {
        assert!(self.mantissa >= 0.0, "sqrt of negative ScaledValue");
        if self.is_zero() {
            return Self::ZERO;
        }
        if self.exponent % 2 == 0 {
            Self::new(self.mantissa.sqrt(), self.exponent / 2)
        } else {
            Self::new((2.0 * self.mantissa).sqrt(), (self.exponent - 1) / 2)
        }
    }

    pub fn powi(&self, n: i32) -> Self {
        let mut base = if n < 0 { self.recip() } else { *self };
        let mut k = n.unsigned_abs();
        let mut acc = Self::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    /// Multiplies by `2^k` exactly.
    pub fn ldexp(&self, k: i64) -> Self {
        if self.is_zero() {
            *self
        } else {
            ScaledValue {
                mantissa: self.mantissa,
                exponent: self.exponent + k,
            }
        }
    }

    /// `n!`, accumulated as a product.
    pub fn factorial(n: u64) -> Self {
        Self::falling_factorial(n, n)
    }

    /// `n! / (n - k)!` for `k <= n`, zero for `k > n`.
    pub fn falling_factorial(n: u64, k: u64) -> Self {
        if k > n {
            return Self::ZERO;
        }
        let mut acc = Self::ONE;
        let mut chunk = 1.0f64;
        for i in (n - k + 1)..=n {
            chunk *= i as f64;
            if chunk > 1e280 {
                acc *= Self::from_f64(chunk);
                chunk = 1.0;
            }
        }
        acc * Self::from_f64(chunk)
    }
}

impl Default for ScaledValue {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<f64> for ScaledValue {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl fmt::Debug for ScaledValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

impl fmt::Display for ScaledValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_f64();
        if v.is_finite() && (v != 0.0 || self.is_zero()) {
            write!(f, "{v:e}")
        } else {
            let l10 = self.ln_abs() / std::f64::consts::LN_10;
            let e = l10.floor();
            write!(f, "{}{}e{}", if self.signum() < 0.0 { "-" } else { "" }, 10f64.powf(l10 - e), e)
        }
    }
}

impl Mul for ScaledValue {
    type Output = ScaledValue;
    fn mul(self, rhs: ScaledValue) -> ScaledValue {
        ScaledValue::new(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl MulAssign for ScaledValue {
    fn mul_assign(&mut self, rhs: ScaledValue) {
        *self = *self * rhs;
    }
}

impl Mul<f64> for ScaledValue {
    type Output = ScaledValue;
    fn mul(self, rhs: f64) -> ScaledValue {
        ScaledValue::new(self.mantissa * rhs, self.exponent)
    }
}

impl Div for ScaledValue {
    type Output = ScaledValue;
    fn div(self, rhs: ScaledValue) -> ScaledValue {
        ScaledValue::new(self.mantissa / rhs.mantissa, self.exponent - rhs.exponent)
    }
}

impl Div<f64> for ScaledValue {
    type Output = ScaledValue;
    fn div(self, rhs: f64) -> ScaledValue {
        ScaledValue::new(self.mantissa / rhs, self.exponent)
    }
}

impl Neg for ScaledValue {
    type Output = ScaledValue;
    fn neg(self) -> ScaledValue {
        ScaledValue {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Add for ScaledValue {
    type Output = ScaledValue;
    fn add(self, rhs: ScaledValue) -> ScaledValue {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.exponent >= rhs.exponent {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let gap = big.exponent - small.exponent;
        if gap > 64 {
            return big;
        }
        ScaledValue::new(big.mantissa + small.mantissa * pow2(-gap), big.exponent)
    }
}

impl Sub for ScaledValue {
    type Output = ScaledValue;
    fn sub(self, rhs: ScaledValue) -> ScaledValue {
        self + (-rhs)
    }
}

impl PartialOrd for ScaledValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        (*self - *other).signum().partial_cmp(&0.0)
    }
}

impl std::iter::Sum for ScaledValue {
    fn sum<I: Iterator<Item = ScaledValue>>(iter: I) -> Self {
        iter.fold(ScaledValue::ZERO, |a, b| a + b)
    }
}
