//! Real numbers stored as `(sign, ln|value|)`.
//!
//! Pressure, eigenfunction and eigenmeasure values span magnitudes like
//! `e^{±cβ}` with β in the hundreds, far outside what plain `f64` can hold
//! without overflow or underflow. Every quantity that can grow or shrink
//! exponentially in β is carried as a [`SignedLog`].

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn flip(self) -> Self {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }

    fn times(self, other: Sign) -> Sign {
        match (self, other) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Positive,
            _ => Sign::Negative,
        }
    }
}

/// A signed real `sign · exp(ln_mag)`; `ln_mag` is ignored when the sign is zero.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SignedLog {
    sign: Sign,
    ln_mag: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: Sign::Zero,
        ln_mag: f64::NEG_INFINITY,
    };
    pub const ONE: SignedLog = SignedLog {
        sign: Sign::Positive,
        ln_mag: 0.0,
    };

    /// `e^{ln}` as a positive value.
    pub fn exp(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        SignedLog {
            sign: Sign::Positive,
            ln_mag: ln,
        }
    }

    pub fn from_parts(sign: Sign, ln_mag: f64) -> Self {
        match sign {
            Sign::Zero => Self::ZERO,
            _ if ln_mag == f64::NEG_INFINITY => Self::ZERO,
            _ => SignedLog { sign, ln_mag },
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x > 0.0 {
            Self::exp(x.ln())
        } else if x < 0.0 {
            SignedLog {
                sign: Sign::Negative,
                ln_mag: (-x).ln(),
            }
        } else {
            Self::ZERO
        }
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            Sign::Zero => 0.0,
            Sign::Positive => self.ln_mag.exp(),
            Sign::Negative => -self.ln_mag.exp(),
        }
    }

    pub fn sign(self) -> Sign {
        self.sign
    }

    /// `ln|self|`, `-inf` for zero.
    pub fn ln_abs(self) -> f64 {
        match self.sign {
            Sign::Zero => f64::NEG_INFINITY,
            _ => self.ln_mag,
        }
    }

    /// Natural log of a positive value.
    pub fn ln(self) -> Option<f64> {
        match self.sign {
            Sign::Positive => Some(self.ln_mag),
            _ => None,
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == Sign::Zero
    }

    pub fn is_positive(self) -> bool {
        self.sign == Sign::Positive
    }

    pub fn is_finite(self) -> bool {
        self.sign == Sign::Zero || self.ln_mag.is_finite()
    }

    pub fn abs(self) -> Self {
        match self.sign {
            Sign::Zero => Self::ZERO,
            _ => SignedLog {
                sign: Sign::Positive,
                ln_mag: self.ln_mag,
            },
        }
    }

    pub fn recip(self) -> Self {
        match self.sign {
            Sign::Zero => SignedLog {
                sign: Sign::Positive,
                ln_mag: f64::INFINITY,
            },
            s => SignedLog {
                sign: s,
                ln_mag: -self.ln_mag,
            },
        }
    }

    pub fn sqrt(self) -> Option<Self> {
        match self.sign {
            Sign::Negative => None,
            Sign::Zero => Some(Self::ZERO),
            Sign::Positive => Some(Self::exp(0.5 * self.ln_mag)),
        }
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        let sign = match self.sign {
            Sign::Negative if n % 2 != 0 => Sign::Negative,
            Sign::Zero => return Self::ZERO,
            _ => Sign::Positive,
        };
        SignedLog {
            sign,
            ln_mag: self.ln_mag * f64::from(n),
        }
    }

    /// Multiply by `e^{ln}`.
    pub fn scale_exp(self, ln: f64) -> Self {
        match self.sign {
            Sign::Zero => self,
            s => Self::from_parts(s, self.ln_mag + ln),
        }
    }

    /// `|self - other| / |other|`, computed without leaving log space.
    ///
    /// Returns `0` when both are zero and `+inf` when only `other` is zero.
    pub fn rel_diff(self, other: SignedLog) -> f64 {
        if other.is_zero() {
            return if self.is_zero() { 0.0 } else { f64::INFINITY };
        }
        let d = self - other;
        if d.is_zero() {
            return 0.0;
        }
        (d.ln_mag - other.ln_mag).exp()
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        fn key(v: &SignedLog) -> (i8, f64) {
            match v.sign {
                Sign::Negative => (-1, -v.ln_mag),
                Sign::Zero => (0, 0.0),
                Sign::Positive => (1, v.ln_mag),
            }
        }
        let (sa, ma) = key(self);
        let (sb, mb) = key(other);
        sa.cmp(&sb).then(ma.total_cmp(&mb))
    }
}

/// `ln(e^a + e^b)` for finite or `-inf` arguments.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(e^a - e^b)` for `a >= b`; `-inf` when equal.
///
/// Uses `expm1`, so the result is as accurate as the inputs even when they
/// agree to the last few bits.
pub fn ln_sub_exp(a: f64, b: f64) -> f64 {
    debug_assert!(a >= b || a.is_nan() || b.is_nan());
    if b == f64::NEG_INFINITY {
        return a;
    }
    let d = b - a;
    if d == 0.0 {
        return f64::NEG_INFINITY;
    }
    a + (-(d.exp_m1())).ln()
}

impl PartialEq for SignedLog {
    fn eq(&self, other: &Self) -> bool {
        self.sign == other.sign && (self.sign == Sign::Zero || self.ln_mag == other.ln_mag)
    }
}

impl PartialOrd for SignedLog {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.ln_mag.is_nan() || other.ln_mag.is_nan() {
            return None;
        }
        Some(self.total_cmp(other))
    }
}

impl Neg for SignedLog {
    type Output = SignedLog;
    fn neg(self) -> SignedLog {
        SignedLog {
            sign: self.sign.flip(),
            ln_mag: self.ln_mag,
        }
    }
}

impl Add for SignedLog {
    type Output = SignedLog;
    fn add(self, rhs: SignedLog) -> SignedLog {
        match (self.sign, rhs.sign) {
            (Sign::Zero, _) => rhs,
            (_, Sign::Zero) => self,
            (a, b) if a == b => SignedLog {
                sign: a,
                ln_mag: ln_add_exp(self.ln_mag, rhs.ln_mag),
            },
            _ => {
                let (big, small) = if self.ln_mag >= rhs.ln_mag {
                    (self, rhs)
                } else {
                    (rhs, self)
                };
                Self::from_parts(big.sign, ln_sub_exp(big.ln_mag, small.ln_mag))
            }
        }
    }
}

impl Sub for SignedLog {
    type Output = SignedLog;
    fn sub(self, rhs: SignedLog) -> SignedLog {
        self + (-rhs)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for SignedLog {
    type Output = SignedLog;
    fn mul(self, rhs: SignedLog) -> SignedLog {
        Self::from_parts(self.sign.times(rhs.sign), self.ln_mag + rhs.ln_mag)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for SignedLog {
    type Output = SignedLog;
    fn div(self, rhs: SignedLog) -> SignedLog {
        self * rhs.recip()
    }
}

impl Sum for SignedLog {
    fn sum<I: Iterator<Item = SignedLog>>(iter: I) -> SignedLog {
        iter.fold(SignedLog::ZERO, |acc, v| acc + v)
    }
}

impl<'a> Sum<&'a SignedLog> for SignedLog {
    fn sum<I: Iterator<Item = &'a SignedLog>>(iter: I) -> SignedLog {
        iter.copied().sum()
    }
}

impl From<f64> for SignedLog {
    fn from(x: f64) -> Self {
        SignedLog::from_f64(x)
    }
}

impl fmt::Display for SignedLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Zero => write!(f, "0"),
            Sign::Positive => write!(f, "exp({})", self.ln_mag),
            Sign::Negative => write!(f, "-exp({})", self.ln_mag),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_and_one() {
        assert_eq!(SignedLog::ONE.to_f64(), 1.0);
        assert!(SignedLog::from_f64(0.0).is_zero());
        assert_eq!((SignedLog::ONE - SignedLog::ONE), SignedLog::ZERO);
    }

    #[test]
    fn huge_range_survives() {
        let big = SignedLog::exp(5.0e5);
        let small = SignedLog::exp(-5.0e5);
        let prod = big * small;
        assert!((prod.ln().unwrap()).abs() < 1e-9);
        assert_eq!((big + small).ln().unwrap(), 5.0e5);
    }

    #[test]
    fn cancellation_is_exact_for_nearby_logs() {
        // e^{1e-13} - 1 = 1e-13 + 5e-27
        let a = SignedLog::exp(1e-13);
        let d = a - SignedLog::ONE;
        assert!((d.to_f64() - 1e-13f64.exp_m1()).abs() < 1e-27);
    }

    #[test]
    fn mixed_signs() {
        let a = SignedLog::from_f64(-3.0);
        let b = SignedLog::from_f64(5.0);
        assert!(((a + b).to_f64() - 2.0).abs() < 1e-15);
        assert!(((a * b).to_f64() + 15.0).abs() < 1e-13);
        assert!(((a - b).to_f64() + 8.0).abs() < 1e-14);
        assert!(a < b);
        assert!(-b < a);
    }

    #[test]
    fn rel_diff_handles_zero() {
        assert_eq!(SignedLog::ZERO.rel_diff(SignedLog::ZERO), 0.0);
        assert!(SignedLog::ONE.rel_diff(SignedLog::ZERO).is_infinite());
        let r = SignedLog::from_f64(1.5).rel_diff(SignedLog::ONE);
        assert!((r - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn arithmetic_matches_f64(x in -1e6f64..1e6, y in -1e6f64..1e6) {
            let (a, b) = (SignedLog::from_f64(x), SignedLog::from_f64(y));
            let scale = x.abs().max(y.abs()).max(1e-300);
            prop_assert!(((a + b).to_f64() - (x + y)).abs() <= 1e-13 * scale);
            prop_assert!(((a - b).to_f64() - (x - y)).abs() <= 1e-13 * scale);
            prop_assert!(((a * b).to_f64() - x * y).abs() <= 1e-13 * (x * y).abs().max(1e-300));
            prop_assert_eq!(a.partial_cmp(&b), x.partial_cmp(&y));
        }
    }
}
