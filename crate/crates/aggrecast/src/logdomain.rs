//! Log-domain scalars and signed coordinates.
//!
//! The adversarial constructions in this crate place points at separations
//! like `x^{(1/tau)^t}`, far beyond the range of `f64`. Every magnitude is
//! therefore carried as its natural logarithm, with a distinguished zero,
//! and coordinates as a sign plus a log-magnitude. Sums go through
//! log-sum-exp, differences through `expm1` so that no intermediate value
//! ever leaves the representable range.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul};

/// A nonnegative real stored as its natural logarithm.
///
/// `LogScalar::ZERO` (log value `-inf`) represents the magnitude 0. The log
/// value is never NaN; constructors panic on invalid input since that is
/// always a programming error, not a data error.
#[derive(Clone, Copy, PartialEq)]
pub struct LogScalar {
    ln: f64,
}

impl LogScalar {
    pub const ZERO: LogScalar = LogScalar { ln: f64::NEG_INFINITY };
    pub const ONE: LogScalar = LogScalar { ln: 0.0 };

    /// From a nonnegative `f64` magnitude.
    pub fn from_value(v: f64) -> Self {
        assert!(v >= 0.0 && !v.is_nan(), "LogScalar magnitude must be >= 0, got {v}");
        LogScalar { ln: v.ln() }
    }

    /// From a natural-log value (`-inf` allowed, NaN not).
    pub fn from_ln(ln: f64) -> Self {
        assert!(!ln.is_nan(), "LogScalar log value must not be NaN");
        LogScalar { ln }
    }

    /// The natural log of the represented magnitude (`-inf` for zero).
    #[inline]
    pub fn ln(self) -> f64 {
        self.ln
    }

    /// The magnitude as `f64`; overflows to `inf` for tower-sized values.
    #[inline]
    pub fn to_f64(self) -> f64 {
        self.ln.exp()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.ln == f64::NEG_INFINITY
    }

    /// `self^k` for real `k`.
    pub fn powf(self, k: f64) -> Self {
        if self.is_zero() {
            assert!(k > 0.0, "0^k undefined for k <= 0");
            return Self::ZERO;
        }
        LogScalar::from_ln(self.ln * k)
    }

    pub fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    pub fn recip(self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        LogScalar { ln: -self.ln }
    }

    /// `self - other`; `None` when `other > self`.
    pub fn checked_sub(self, other: Self) -> Option<Self> {
        match self.cmp(&other) {
            Ordering::Less => None,
            Ordering::Equal => Some(Self::ZERO),
            Ordering::Greater => {
                if other.is_zero() {
                    return Some(self);
                }
                // ln(e^a - e^b) = a + ln(1 - e^(b-a)), b < a
                let d = other.ln - self.ln;
                Some(LogScalar::from_ln(self.ln + (-f64::exp_m1(d)).ln()))
            }
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other { self } else { other }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other { self } else { other }
    }
}

/// Numerically careful `ln(e^a + e^b)`.
#[inline]
pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a >= b {
        a + f64::exp(b - a).ln_1p()
    } else {
        b + f64::exp(a - b).ln_1p()
    }
}

impl Add for LogScalar {
    type Output = LogScalar;
    fn add(self, rhs: Self) -> Self {
        LogScalar { ln: log_sum_exp(self.ln, rhs.ln) }
    }
}

impl Mul for LogScalar {
    type Output = LogScalar;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        LogScalar::from_ln(self.ln + rhs.ln)
    }
}

impl Div for LogScalar {
    type Output = LogScalar;
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "division by zero LogScalar");
        if self.is_zero() {
            return Self::ZERO;
        }
        LogScalar::from_ln(self.ln - rhs.ln)
    }
}

impl Sum for LogScalar {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |acc, x| acc + x)
    }
}

impl Eq for LogScalar {}

impl PartialOrd for LogScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LogScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        // no NaN by invariant, so total_cmp matches numeric order
        self.ln.total_cmp(&other.ln)
    }
}

impl fmt::Debug for LogScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "LogScalar(0)")
        } else if self.ln.abs() < 300.0 {
            write!(f, "LogScalar({:.6e})", self.ln.exp())
        } else {
            write!(f, "LogScalar(exp {:.6e})", self.ln)
        }
    }
}

impl fmt::Display for LogScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ln.abs() < 300.0 {
            write!(f, "{:.6e}", self.ln.exp())
        } else {
            write!(f, "exp({:.6e})", self.ln)
        }
    }
}

/// A signed real stored as sign plus log-magnitude.
///
/// Sign is -1, 0 or +1; magnitude is `LogScalar::ZERO` exactly when sign is 0.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct SignedLog {
    sign: i8,
    mag: LogScalar,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { sign: 0, mag: LogScalar::ZERO };

    pub fn new(sign: i8, mag: LogScalar) -> Self {
        assert!(sign == -1 || sign == 0 || sign == 1, "sign must be -1, 0 or 1");
        if sign == 0 || mag.is_zero() {
            Self::ZERO
        } else {
            SignedLog { sign, mag }
        }
    }

    pub fn from_f64(v: f64) -> Self {
        assert!(v.is_finite(), "coordinate must be finite, got {v}");
        if v == 0.0 {
            Self::ZERO
        } else {
            SignedLog { sign: if v > 0.0 { 1 } else { -1 }, mag: LogScalar::from_value(v.abs()) }
        }
    }

    pub fn positive(mag: LogScalar) -> Self {
        Self::new(1, mag)
    }

    #[inline]
    pub fn sign(self) -> i8 {
        self.sign
    }

    #[inline]
    pub fn abs(self) -> LogScalar {
        self.mag
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(self) -> f64 {
        self.sign as f64 * self.mag.to_f64()
    }

    pub fn neg(self) -> Self {
        SignedLog { sign: -self.sign, mag: self.mag }
    }

    pub fn sub(self, rhs: Self) -> Self {
        self.add(rhs.neg())
    }

    pub fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        if self.sign == rhs.sign {
            return SignedLog { sign: self.sign, mag: self.mag + rhs.mag };
        }
        match self.mag.cmp(&rhs.mag) {
            Ordering::Equal => Self::ZERO,
            Ordering::Greater => {
                SignedLog { sign: self.sign, mag: self.mag.checked_sub(rhs.mag).unwrap() }
            }
            Ordering::Less => {
                SignedLog { sign: rhs.sign, mag: rhs.mag.checked_sub(self.mag).unwrap() }
            }
        }
    }

    /// Scale by a nonnegative factor.
    pub fn scale(self, factor: LogScalar) -> Self {
        if factor.is_zero() {
            return Self::ZERO;
        }
        SignedLog { sign: self.sign, mag: self.mag * factor }
    }

    pub fn cmp_signed(self, rhs: Self) -> Ordering {
        match self.sign.cmp(&rhs.sign) {
            Ordering::Equal => {
                if self.sign >= 0 {
                    self.mag.cmp(&rhs.mag)
                } else {
                    rhs.mag.cmp(&self.mag)
                }
            }
            ord => ord,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn add_matches_native_in_range() {
        let a = LogScalar::from_value(3.5);
        let b = LogScalar::from_value(0.25);
        assert_relative_eq!((a + b).to_f64(), 3.75, max_relative = 1e-12);
    }

    #[test]
    fn add_with_zero_is_identity() {
        let a = LogScalar::from_value(42.0);
        assert_eq!(a + LogScalar::ZERO, a);
        assert_eq!(LogScalar::ZERO + a, a);
    }

    #[test]
    fn add_dominates_max() {
        let a = LogScalar::from_ln(1e4);
        let b = LogScalar::from_ln(12.0);
        assert!(a + b >= a.max(b));
    }

    #[test]
    fn mul_adds_logs() {
        let a = LogScalar::from_ln(700.0);
        let b = LogScalar::from_ln(800.0);
        assert_eq!((a * b).ln(), 1500.0);
    }

    #[test]
    fn pow_scales_log() {
        let a = LogScalar::from_value(4.0);
        assert_relative_eq!(a.powf(1024.0).ln(), 1024.0 * 4.0f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn ordering_matches_magnitudes() {
        let vals = [0.0, 1e-300, 0.5, 1.0, 3.0, 1e200];
        for (i, &x) in vals.iter().enumerate() {
            for (j, &y) in vals.iter().enumerate() {
                let lx = LogScalar::from_value(x);
                let ly = LogScalar::from_value(y);
                assert_eq!(lx.cmp(&ly), i.cmp(&j).then(x.partial_cmp(&y).unwrap()));
            }
        }
    }

    #[test]
    fn checked_sub_small_gap() {
        // relative gap of 1e-9 survives the expm1 path
        let a = LogScalar::from_value(1.0);
        let b = LogScalar::from_ln(-1e-9);
        let d = a.checked_sub(b).unwrap();
        assert_relative_eq!(d.to_f64(), -f64::exp_m1(-1e-9), max_relative = 1e-6);
        assert!(b.checked_sub(a).is_none());
    }

    #[test]
    fn signed_addition_cases() {
        let x = SignedLog::from_f64(5.0);
        let y = SignedLog::from_f64(-3.0);
        assert_relative_eq!(x.add(y).to_f64(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(x.sub(y).to_f64(), 8.0, max_relative = 1e-12);
        assert_eq!(x.sub(x), SignedLog::ZERO);
        assert_eq!(SignedLog::ZERO.sub(x).sign(), -1);
    }

    #[test]
    fn signed_ordering() {
        let mut v: Vec<SignedLog> =
            [-4.0, -0.5, 0.0, 0.25, 7.0].iter().map(|&x| SignedLog::from_f64(x)).collect();
        let sorted = v.clone();
        v.reverse();
        v.sort_by(|a, b| a.cmp_signed(*b));
        assert_eq!(v, sorted);
    }
}
