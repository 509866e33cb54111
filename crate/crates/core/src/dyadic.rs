//! Exact views of floating-point data.
//!
//! Every finite `f64` is a dyadic rational `m · 2^e`. Scaling a finite set of
//! them by a large enough power of two yields integers, which is what the
//! exact series engine and the leading-coefficient negativity test run on.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scaled::ScaledComplex;

/// `x = mantissa · 2^exp2` with an odd mantissa (or zero).
pub fn decompose(x: f64) -> (i64, i64) {
    debug_assert!(x.is_finite());
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (mut m, mut e) = if raw_exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1i64 << 52), raw_exp - 1075)
    };
    let tz = m.trailing_zeros() as i64;
    m >>= tz;
    e += tz;
    (sign * m, e)
}

/// Number of fractional binary digits of `x` (0 for integers).
pub fn fractional_bits(x: f64) -> u32 {
    let (m, e) = decompose(x);
    if m == 0 || e >= 0 {
        0
    } else {
        (-e) as u32
    }
}

pub fn fractional_bits_complex(z: Complex64) -> u32 {
    fractional_bits(z.re).max(fractional_bits(z.im))
}

/// `x · 2^shift` as an exact integer; `shift` must clear all fractional bits.
pub fn scaled_integer(x: f64, shift: u32) -> BigInt {
    let (m, e) = decompose(x);
    let total = e + shift as i64;
    debug_assert!(m == 0 || total >= 0, "shift does not clear fractional bits");
    BigInt::from(m) << total.max(0) as usize
}

/// Gaussian integer `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GaussInt {
    pub re: BigInt,
    pub im: BigInt,
}

impl GaussInt {
    pub fn new(re: BigInt, im: BigInt) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::new(BigInt::one(), BigInt::zero())
    }

    /// `z · 2^shift`, exact.
    pub fn from_complex(z: Complex64, shift: u32) -> Self {
        Self::new(scaled_integer(z.re, shift), scaled_integer(z.im, shift))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn bits(&self) -> u64 {
        self.re.bits().max(self.im.bits())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    pub fn shl(&self, n: usize) -> Self {
        Self::new(&self.re << n, &self.im << n)
    }

    pub fn mul_big(&self, k: &BigInt) -> Self {
        Self::new(&self.re * k, &self.im * k)
    }

    pub fn mul_biguint(&self, k: &BigUint) -> Self {
        let re = if self.re.is_zero() {
            BigInt::zero()
        } else {
            mul_signed(&self.re, k)
        };
        let im = if self.im.is_zero() {
            BigInt::zero()
        } else {
            mul_signed(&self.im, k)
        };
        Self::new(re, im)
    }

    /// Approximate value as a scaled complex number (relative error ~2^-60).
    pub fn to_scaled(&self) -> ScaledComplex {
        if self.is_zero() {
            return ScaledComplex::ZERO;
        }
        let shift = self.bits().saturating_sub(62);
        let re = big_to_f64(&(&self.re >> shift as usize));
        let im = big_to_f64(&(&self.im >> shift as usize));
        let (m, e) = ScaledComplex::new(Complex64::new(re, im)).raw_parts();
        ScaledComplex::from_raw_parts(m, e + shift as i64)
    }
}

fn mul_signed(a: &BigInt, k: &BigUint) -> BigInt {
    let mag = a.magnitude() * k;
    BigInt::from_biguint(
        if a.is_negative() {
            Sign::Minus
        } else {
            Sign::Plus
        },
        mag,
    )
}

fn big_to_f64(x: &BigInt) -> f64 {
    // Arithmetic right shift rounds toward -inf; callers only need ~2^-60.
    x.to_f64().unwrap_or(0.0)
}

impl Add for &GaussInt {
    type Output = GaussInt;
    fn add(self, rhs: &GaussInt) -> GaussInt {
        GaussInt::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &GaussInt {
    type Output = GaussInt;
    fn sub(self, rhs: &GaussInt) -> GaussInt {
        GaussInt::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl AddAssign<&GaussInt> for GaussInt {
    fn add_assign(&mut self, rhs: &GaussInt) {
        if !rhs.re.is_zero() {
            self.re += &rhs.re;
        }
        if !rhs.im.is_zero() {
            self.im += &rhs.im;
        }
    }
}

impl Neg for GaussInt {
    type Output = GaussInt;
    fn neg(self) -> GaussInt {
        GaussInt::new(-self.re, -self.im)
    }
}

impl Mul for &GaussInt {
    type Output = GaussInt;
    fn mul(self, rhs: &GaussInt) -> GaussInt {
        if self.im.is_zero() && rhs.im.is_zero() {
            return GaussInt::new(&self.re * &rhs.re, BigInt::zero());
        }
        GaussInt::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decompose_is_exact() {
        for &x in &[1.0, -3.0, 0.5, 0.1, 6.0, 1e-310, -2.75, 1e300] {
            let (m, e) = decompose(x);
            assert!(m % 2 != 0);
            let back = m as f64 * 2f64.powi(e as i32);
            if x.abs() > 1e-300 && x.abs() < 1e300 {
                assert_eq!(back, x);
            }
        }
        assert_eq!(decompose(6.0), (3, 1));
        assert_eq!(fractional_bits(0.75), 2);
        assert_eq!(fractional_bits(-4.0), 0);
    }

    #[test]
    fn gaussian_products() {
        let a = GaussInt::from_complex(Complex64::new(1.5, -0.5), 1);
        assert_eq!(a, GaussInt::new(BigInt::from(3), BigInt::from(-1)));
        let p = &a * &a.conj();
        assert_eq!(p, GaussInt::new(BigInt::from(10), BigInt::zero()));
        let s = GaussInt::new(BigInt::from(1) << 200usize, BigInt::from(-3)).to_scaled();
        assert!((s.magnitude_log2() - 200.0).abs() < 1e-12);
    }
}
