//! Complex numbers with an unbounded exponent.
//!
//! A [`ScaledComplex`] is stored as a complex mantissa whose larger component
//! lies in `[0.5, 1)` together with a binary exponent held in an `i64`. That
//! covers natural-log magnitudes of roughly ±6e18, which is enough for
//! `e^{δ rⁿ}` factors and for Taylor coefficients far past `k = 10⁵`.
//!
//! The public view is polar: [`ScaledComplex::magnitude_log`] (natural log of
//! the modulus, `-inf` for zero) and [`ScaledComplex::phase`] in `(-π, π]`.

use std::cmp::Ordering;
use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub};

use num_complex::Complex64;

// Cody-Waite split of ln 2 so that `k * LN2_HI` is exact for |k| < 2^32.
const LN2_HI: f64 = 6.931_471_803_691_238_164_90e-01;
const LN2_LO: f64 = 1.908_214_929_270_587_700_02e-10;

/// Exponent offsets beyond which the smaller addend cannot affect the sum.
const ALIGN_CUTOFF: i64 = 1100;

#[derive(Clone, Copy, PartialEq)]
pub struct ScaledComplex {
    mant: Complex64,
    exp2: i64,
}

/// `2^e` for `e` inside the normal f64 exponent range.
#[inline]
pub(crate) fn pow2(e: i64) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// Multiplies by `2^e` for any `e`, flushing to zero or infinity at the ends.
#[inline]
pub(crate) fn ldexp(mut x: f64, mut e: i64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    while e > 1023 {
        x *= pow2(1023);
        e -= 1023;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1022 {
        x *= pow2(-1022);
        e += 1022;
        if x == 0.0 {
            return x;
        }
    }
    x * pow2(e)
}

/// Binary exponent `e` with `x ∈ [2^(e-1), 2^e)` for finite positive `x`.
#[inline]
fn frexp_exp(x: f64) -> i64 {
    let bits = x.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        // subnormal
        frexp_exp(x * pow2(64)) - 64
    } else {
        raw - 1022
    }
}

impl ScaledComplex {
    pub const ZERO: Self = Self {
        mant: Complex64::new(0.0, 0.0),
        exp2: 0,
    };
    pub const ONE: Self = Self {
        mant: Complex64::new(0.5, 0.0),
        exp2: 1,
    };

    #[inline]
    fn normalized(mant: Complex64, exp2: i64) -> Self {
        let a = mant.re.abs().max(mant.im.abs());
        if a == 0.0 || !a.is_finite() {
            if a == 0.0 {
                return Self::ZERO;
            }
            return Self { mant, exp2 };
        }
        let e = frexp_exp(a);
        if e == 0 {
            return Self { mant, exp2 };
        }
        let s = ldexp(1.0, -e);
        Self {
            mant: mant * s,
            exp2: exp2 + e,
        }
    }

    pub fn new(z: Complex64) -> Self {
        Self::normalized(z, 0)
    }

    pub fn from_real(x: f64) -> Self {
        Self::new(Complex64::new(x, 0.0))
    }

    /// `exp(log_mag + i·phase)`.
    pub fn from_log_polar(log_mag: f64, phase: f64) -> Self {
        if log_mag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let k = (log_mag / LN_2).round();
        let frac = (log_mag - k * LN2_HI) - k * LN2_LO;
        let m = frac.exp();
        Self::normalized(Complex64::new(m * phase.cos(), m * phase.sin()), k as i64)
    }

    /// `e^w` for any finite complex `w`.
    pub fn exp(w: Complex64) -> Self {
        Self::from_log_polar(w.re, w.im)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.re == 0.0 && self.mant.im == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.mant.re.is_finite() && self.mant.im.is_finite()
    }

    /// Natural log of the modulus; `-inf` for zero.
    pub fn magnitude_log(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.mant.norm().ln() + self.exp2 as f64 * LN_2
    }

    /// Log base 2 of the modulus; `-inf` for zero.
    pub fn magnitude_log2(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.mant.norm().log2() + self.exp2 as f64
    }

    /// Argument in `(-π, π]`; zero has phase 0.
    pub fn phase(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let p = self.mant.im.atan2(self.mant.re);
        if p <= -PI {
            PI
        } else {
            p
        }
    }

    /// Ordinary complex value; overflows to infinity and underflows to zero.
    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(
            ldexp(self.mant.re, self.exp2),
            ldexp(self.mant.im, self.exp2),
        )
    }

    /// Ordinary complex value if it fits without overflow.
    pub fn try_to_complex(&self) -> Option<Complex64> {
        let z = self.to_complex();
        (z.re.is_finite() && z.im.is_finite()).then_some(z)
    }

    pub fn conj(&self) -> Self {
        Self {
            mant: self.mant.conj(),
            exp2: self.exp2,
        }
    }

    pub fn abs(&self) -> Self {
        Self::normalized(Complex64::new(self.mant.norm(), 0.0), self.exp2)
    }

    pub fn scale(&self, x: f64) -> Self {
        Self::normalized(self.mant * x, self.exp2)
    }

    pub fn mul_complex(&self, z: Complex64) -> Self {
        Self::normalized(self.mant * z, self.exp2)
    }

    pub fn recip(&self) -> Self {
        Self::normalized(self.mant.inv(), -self.exp2)
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = Self::ONE;
        let mut base = *self;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc *= base;
            }
            base *= base;
            n >>= 1;
        }
        acc
    }

    /// Compares moduli.
    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        // Normalized mantissas have modulus in [0.5, sqrt 2), so exponents
        // differing by two or more decide the order outright.
        match self.exp2 - other.exp2 {
            d if d >= 2 => Ordering::Greater,
            d if d <= -2 => Ordering::Less,
            d => {
                let a = self.mant.norm() * pow2(d);
                let b = other.mant.norm();
                a.partial_cmp(&b).unwrap_or(Ordering::Equal)
            }
        }
    }

    pub(crate) fn raw_parts(&self) -> (Complex64, i64) {
        (self.mant, self.exp2)
    }

    pub(crate) fn from_raw_parts(mant: Complex64, exp2: i64) -> Self {
        Self::normalized(mant, exp2)
    }
}

impl Default for ScaledComplex {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<Complex64> for ScaledComplex {
    fn from(z: Complex64) -> Self {
        Self::new(z)
    }
}

impl From<f64> for ScaledComplex {
    fn from(x: f64) -> Self {
        Self::from_real(x)
    }
}

impl Mul for ScaledComplex {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::normalized(self.mant * rhs.mant, self.exp2 + rhs.exp2)
    }
}

impl MulAssign for ScaledComplex {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl Div for ScaledComplex {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Self::normalized(self.mant / rhs.mant, self.exp2 - rhs.exp2)
    }
}

impl Add for ScaledComplex {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exp2 >= rhs.exp2 {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let d = lo.exp2 - hi.exp2;
        if d < -ALIGN_CUTOFF {
            return hi;
        }
        Self::normalized(hi.mant + lo.mant * ldexp(1.0, d), hi.exp2)
    }
}

impl AddAssign for ScaledComplex {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Neg for ScaledComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            mant: -self.mant,
            exp2: self.exp2,
        }
    }
}

impl Sub for ScaledComplex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl fmt::Debug for ScaledComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({} + {}i)", self.magnitude_log(), self.phase())
    }
}

/// Sums many scaled values with a single alignment pass.
///
/// Returns the sum together with the largest term modulus, which callers use
/// to measure cancellation.
pub fn sum_with_max(terms: &[ScaledComplex]) -> (ScaledComplex, ScaledComplex) {
    let mut top = i64::MIN;
    for t in terms {
        if !t.is_zero() && t.exp2 > top {
            top = t.exp2;
        }
    }
    if top == i64::MIN {
        return (ScaledComplex::ZERO, ScaledComplex::ZERO);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut max_norm = 0.0f64;
    for t in terms {
        if t.is_zero() {
            continue;
        }
        let d = t.exp2 - top;
        if d < -ALIGN_CUTOFF {
            continue;
        }
        let s = ldexp(1.0, d);
        let v = t.mant * s;
        acc += v;
        max_norm = max_norm.max(v.norm());
    }
    (
        ScaledComplex::normalized(acc, top),
        ScaledComplex::normalized(Complex64::new(max_norm, 0.0), top),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn zero_and_one() {
        assert!(ScaledComplex::ZERO.is_zero());
        assert_eq!(ScaledComplex::ZERO.magnitude_log(), f64::NEG_INFINITY);
        assert_eq!(ScaledComplex::ONE.to_complex(), Complex64::new(1.0, 0.0));
        assert_eq!(ScaledComplex::ONE.magnitude_log(), 0.0);
    }

    #[test]
    fn huge_magnitudes_do_not_overflow() {
        let a = ScaledComplex::from_log_polar(1e15, 1.0);
        let b = ScaledComplex::from_log_polar(-1e15, 2.0);
        let p = a * a;
        assert!((p.magnitude_log() - 2e15).abs() / 2e15 < 1e-14);
        let q = a * b;
        assert!(q.magnitude_log().abs() < 1.0);
        assert!((q.phase() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn phase_wraps_into_half_open_interval() {
        let a = ScaledComplex::from_log_polar(0.0, 3.0);
        let p = a * a;
        assert!(p.phase() > -PI && p.phase() <= PI);
        assert!((p.phase() - (6.0 - 2.0 * PI)).abs() < 1e-14);
        assert_eq!(ScaledComplex::new(Complex64::new(-1.0, -0.0)).phase(), PI);
    }

    #[test]
    fn addition_cancels_exactly() {
        let a = ScaledComplex::from_log_polar(500.0, 0.3);
        assert!((a - a).is_zero());
    }

    #[test]
    fn sum_with_max_reports_largest_term() {
        let t = [
            ScaledComplex::from_real(3.0),
            ScaledComplex::from_real(-3.0),
            ScaledComplex::from_real(1e-3),
        ];
        let (s, m) = sum_with_max(&t);
        assert!(rel(s.to_complex(), Complex64::new(1e-3, 0.0)) < 1e-12);
        assert_eq!(m.to_complex().re, 3.0);
    }

    proptest! {
        #[test]
        fn round_trip(re in -1e300f64..1e300, im in -1e300f64..1e300) {
            let z = Complex64::new(re, im);
            let s = ScaledComplex::new(z);
            prop_assert!(rel(s.to_complex(), z) <= 1e-14 || z.norm() == 0.0);
            // ln|z| ≈ 690 here, whose ulp alone is ~1e-13
            let back = ScaledComplex::from_log_polar(s.magnitude_log(), s.phase()).to_complex();
            prop_assert!(rel(back, z) <= 1e-12);
        }

        #[test]
        fn arithmetic_matches_complex(a in -1e3f64..1e3, b in -1e3f64..1e3, c in -1e3f64..1e3, d in -1e3f64..1e3) {
            let x = Complex64::new(a, b);
            let y = Complex64::new(c, d);
            let sx = ScaledComplex::new(x);
            let sy = ScaledComplex::new(y);
            prop_assert!(rel((sx * sy).to_complex(), x * y) < 1e-14 || (x * y).norm() < 1e-300);
            let sum = x + y;
            if sum.norm() > 1e-6 * (x.norm() + y.norm()) {
                prop_assert!(rel((sx + sy).to_complex(), sum) < 1e-9);
            }
        }
    }
}
