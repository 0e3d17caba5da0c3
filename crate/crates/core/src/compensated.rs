//! Double-double ("compensated") arithmetic, roughly 32 significant digits.
//!
//! Only the handful of operations the certificate discriminants need.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::from_f64(self.hi.max(0.0).sqrt());
        }
        // one Newton correction on the f64 root
        let s = self.hi.sqrt();
        let s2 = Self::from_f64(s) * Self::from_f64(s);
        let corr = (self - s2).to_f64() / (2.0 * s);
        let (hi, lo) = quick_two_sum(s, corr);
        Self { hi, lo }
    }

    pub fn square(self) -> Self {
        self * self
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Mul<f64> for DoubleDouble {
    type Output = Self;
    fn mul(self, o: f64) -> Self {
        self * Self::from_f64(o)
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self - o * q1;
        let q2 = r.hi / o.hi;
        let r = r - o * q2;
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from_f64(q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_digits() {
        // (1 + 2^-60) - 1 is lost in f64 but kept here
        let tiny = 2f64.powi(-60);
        let x = DoubleDouble::from_f64(1.0) + DoubleDouble::from_f64(tiny);
        let d = x - DoubleDouble::from_f64(1.0);
        assert_eq!(d.to_f64(), tiny);
    }

    #[test]
    fn sqrt_and_div_round_trip() {
        for v in [2.0, 3.0, 0.1, 1e-12, 12345.678] {
            let x = DoubleDouble::from_f64(v);
            let s = x.sqrt();
            let back = s * s - x;
            assert!(back.to_f64().abs() <= 1e-30 * v, "v={v}");
            let q = x / DoubleDouble::from_f64(3.0);
            let r = q * 3.0 - x;
            assert!(r.to_f64().abs() <= 1e-30 * v);
        }
    }
}
