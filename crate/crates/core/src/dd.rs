//! Double-double arithmetic for phase reduction.
//!
//! Fast phases such as `t/ε` reach 10⁵–10⁶ radians in the small-ε runs. A
//! plain `f64` product keeps only ~10 correct digits of the reduced angle,
//! so every reduction modulo a period goes through an unevaluated sum
//! `hi + lo` with `|lo| ≤ ulp(hi)/2`.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Unevaluated sum of two doubles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

/// 2π as a double-double.
pub const TWO_PI: DoubleDouble = DoubleDouble {
    hi: std::f64::consts::TAU,
    lo: 2.449_293_598_294_706_4e-16,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
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
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    /// Exact-to-dd quotient `a / b` of two doubles.
    pub fn div_f64(a: f64, b: f64) -> Self {
        let q1 = a / b;
        // a - q1*b is exact with an fma
        let r = (-q1).mul_add(b, a);
        let q2 = r / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        DoubleDouble { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (h, l) = quick_two_sum(hi, self.lo.floor());
            DoubleDouble { hi: h, lo: l }
        } else {
            DoubleDouble { hi, lo: 0.0 }
        }
    }

    /// Reduce into `[0, period)`.
    pub fn rem_euclid(self, period: DoubleDouble) -> Self {
        let n = (self / period).floor();
        let mut r = self - period * n;
        // the quotient estimate can be off by one ulp at the boundaries
        if r.hi < 0.0 {
            r = r + period;
        }
        if r.to_f64() >= period.to_f64() {
            r = r - period;
        }
        if r.hi < 0.0 {
            DoubleDouble::ZERO
        } else {
            r
        }
    }

    /// Fractional part in `[0, 1)`.
    pub fn fract(self) -> Self {
        self.rem_euclid(DoubleDouble::from_f64(1.0))
    }
}

impl Add for DoubleDouble {
    type Output = DoubleDouble;
    fn add(self, o: DoubleDouble) -> DoubleDouble {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let e = e + t;
        let (s, e) = quick_two_sum(s, e);
        let e = e + f;
        let (hi, lo) = quick_two_sum(s, e);
        DoubleDouble { hi, lo }
    }
}

impl Add<f64> for DoubleDouble {
    type Output = DoubleDouble;
    fn add(self, o: f64) -> DoubleDouble {
        self + DoubleDouble::from_f64(o)
    }
}

impl Neg for DoubleDouble {
    type Output = DoubleDouble;
    fn neg(self) -> DoubleDouble {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = DoubleDouble;
    fn sub(self, o: DoubleDouble) -> DoubleDouble {
        self + (-o)
    }
}

impl Mul for DoubleDouble {
    type Output = DoubleDouble;
    fn mul(self, o: DoubleDouble) -> DoubleDouble {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DoubleDouble { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = DoubleDouble;

    fn div(self, other: DoubleDouble) -> Self {
        let q1 = self.hi / other.hi;
        let r = self - other * q1;
        let q2 = r.hi / other.hi;
        let r = r - other * q2;
        let q3 = r.hi / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DoubleDouble { hi, lo } + q3
    }
}

impl Mul<f64> for DoubleDouble {
    type Output = DoubleDouble;
    fn mul(self, o: f64) -> DoubleDouble {
        let (p, e) = two_prod(self.hi, o);
        let e = e + self.lo * o;
        let (hi, lo) = quick_two_sum(p, e);
        DoubleDouble { hi, lo }
    }
}

/// `(t / eps) mod period`, with the quotient and the reduction carried in
/// double-double.
pub fn reduced_fast_time(t: f64, eps: f64, period: DoubleDouble) -> f64 {
    DoubleDouble::div_f64(t, eps).rem_euclid(period).to_f64()
}

/// Incremental accumulator for the diagonal phase `τ* = (n·Δt/ε) mod P`.
#[derive(Debug, Clone, Copy)]
pub struct PhaseAccumulator {
    increment: DoubleDouble,
    period: DoubleDouble,
    value: DoubleDouble,
}

impl PhaseAccumulator {
    pub fn new(dt: f64, eps: f64, period: DoubleDouble) -> Self {
        PhaseAccumulator {
            increment: DoubleDouble::div_f64(dt, eps).rem_euclid(period),
            period,
            value: DoubleDouble::ZERO,
        }
    }

    pub fn advance(&mut self) {
        self.value = (self.value + self.increment).rem_euclid(self.period);
    }

    pub fn value(&self) -> f64 {
        self.value.to_f64()
    }
}

/// Period as a double-double: 2π for NKG, `a²/(2π)` for NLS on `[0, a]`.
pub fn period_from_length(length: f64) -> DoubleDouble {
    DoubleDouble::from_f64(length) * length / TWO_PI
}
