//! Exact Taylor solution over the Gaussian integers.
//!
//! All data is dyadic, so after scaling by powers of two the recurrence for
//! the derivatives `f^{(i)}(0)` runs in integers. With `D = 2^s` clearing
//! the fractional bits of every term coefficient and exponent coefficient,
//!
//! * `G_m = D^m · (e^{Q})^{(m)}(0)` for `Q(0) = 0` obeys
//!   `G_{m+1} = Σ_l C(m, l−1) · (D^l l! q_l) · G_{m−l+1}`;
//! * `Ã_i = D^{i+1} A^{(i)}(0)`, `B̃_i = D^{i+1} B^{(i)}(0)` are sums over terms
//!   of `(D c) · D^k · i!/(i−k)! · G_{i−k}`;
//! * `F_i = T · D^i · f^{(i)}(0)` obeys
//!   `F_{i+2} = −Σ_j C(i, j) · (Ã_{i−j} F_{j+1} + D · B̃_{i−j} F_j)`.
//!
//! Constant parts of exponents are folded into the term coefficient as the
//! float `c·e^{q_0}`; the result is then exact for those rounded inputs.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::One;

use super::PowerSeries;
use crate::dyadic::{fractional_bits_complex, GaussInt};
use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::poly::ComplexPoly;
use crate::scaled::ScaledComplex;

#[derive(Clone, Debug)]
pub struct ExactOptions {
    /// Abort with [`Error::Unreliable`] when an integer exceeds this many bits.
    pub max_bits: u64,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self { max_bits: 1 << 18 }
    }
}

struct Prepared {
    coeff: Complex64,
    power: usize,
    exponent: ComplexPoly, // without constant term
}

fn prepare(e: &ExpPoly) -> Vec<Prepared> {
    e.terms()
        .iter()
        .map(|t| {
            let q0 = t.exponent.coeff(0);
            let coeff = if q0 == Complex64::new(0.0, 0.0) {
                t.coeff
            } else {
                t.coeff * q0.exp()
            };
            Prepared {
                coeff,
                power: t.power as usize,
                exponent: t.exponent.without_constant(),
            }
        })
        .filter(|p| p.coeff.re.is_finite() && p.coeff.im.is_finite())
        .collect()
}

fn binomial(m: usize, k: usize) -> BigUint {
    let mut b = BigUint::one();
    for t in 0..k {
        b = b * BigUint::from(m - t) / BigUint::from(t + 1);
    }
    b
}

fn factorial(l: usize) -> BigUint {
    (1..=l).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// `G_0..G_n` for `e^{Q}` with `Q(0) = 0`.
fn exp_derivatives(q: &ComplexPoly, s: u32, n: usize, max_bits: u64) -> Result<Vec<GaussInt>> {
    let deg = q.degree_or_zero();
    let weights: Vec<GaussInt> = (1..=deg)
        .map(|l| GaussInt::from_complex(q.coeff(l), s * l as u32).mul_biguint(&factorial(l)))
        .collect();
    let mut g = Vec::with_capacity(n + 1);
    g.push(GaussInt::one());
    for m in 0..n {
        let mut acc = GaussInt::zero();
        for l in 1..=deg.min(m + 1) {
            let w = &weights[l - 1];
            if w.is_zero() {
                continue;
            }
            acc += &(w * &g[m + 1 - l]).mul_biguint(&binomial(m, l - 1));
        }
        if acc.bits() > max_bits {
            return Err(Error::Unreliable(format!(
                "exponential derivative exceeded {max_bits} bits at order {m}"
            )));
        }
        g.push(acc);
    }
    Ok(g)
}

/// `D^{i+1} e^{(i)}(0)` for `i = 0..=n`.
fn scaled_derivatives(
    terms: &[Prepared],
    s: u32,
    n: usize,
    max_bits: u64,
) -> Result<Vec<GaussInt>> {
    let mut out = vec![GaussInt::zero(); n + 1];
    for t in terms {
        if t.power > n {
            continue;
        }
        let g = exp_derivatives(&t.exponent, s, n - t.power, max_bits)?;
        let c = GaussInt::from_complex(t.coeff, s * (1 + t.power as u32));
        // falling factorial i!/(i−k)!, updated as i grows
        let mut falling = factorial(t.power);
        for i in t.power..=n {
            if i > t.power {
                falling = falling * BigUint::from(i) / BigUint::from(i - t.power);
            }
            let h = (&c * &g[i - t.power]).mul_biguint(&falling);
            out[i] += &h;
        }
    }
    Ok(out)
}

fn required_shift(terms: &[Prepared]) -> u32 {
    terms
        .iter()
        .flat_map(|t| {
            std::iter::once(fractional_bits_complex(t.coeff)).chain(
                t.exponent
                    .coeffs()
                    .iter()
                    .skip(1)
                    .map(|&q| fractional_bits_complex(q)),
            )
        })
        .max()
        .unwrap_or(0)
}

/// Taylor coefficients `c_0..c_n` of the solution of `f'' + A f' + B f = 0`
/// with `f(0) = f0`, `f'(0) = f1`, computed in exact integer arithmetic and
/// rounded only at the end.
pub fn solve_exact(
    a: &ExpPoly,
    b: &ExpPoly,
    f0: Complex64,
    f1: Complex64,
    n: usize,
    opts: &ExactOptions,
) -> Result<PowerSeries> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "truncation order must be at least 2".into(),
        ));
    }
    for x in [f0.re, f0.im, f1.re, f1.im] {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(
                "initial conditions must be finite".into(),
            ));
        }
    }
    let ta = prepare(a);
    let tb = prepare(b);
    let s = required_shift(&ta).max(required_shift(&tb));
    let at = scaled_derivatives(&ta, s, n, opts.max_bits)?;
    let bt = scaled_derivatives(&tb, s, n, opts.max_bits)?;

    let t = fractional_bits_complex(f0).max(fractional_bits_complex(f1).saturating_sub(s));
    let mut f = Vec::with_capacity(n + 1);
    f.push(GaussInt::from_complex(f0, t));
    f.push(GaussInt::from_complex(f1, t + s));

    // Pascal row C(i, ·), advanced in place.
    let mut row: Vec<BigUint> = vec![BigUint::one()];
    for i in 0..=n - 2 {
        if i > 0 {
            row.push(BigUint::one());
            for j in (1..i).rev() {
                let prev = row[j - 1].clone();
                row[j] += prev;
            }
        }
        let mut acc = GaussInt::zero();
        for j in 0..=i {
            let ai = &at[i - j];
            let bi = &bt[i - j];
            let mut inner = GaussInt::zero();
            if !ai.is_zero() && !f[j + 1].is_zero() {
                inner += &(ai * &f[j + 1]);
            }
            if !bi.is_zero() && !f[j].is_zero() {
                inner += &(bi * &f[j]).shl(s as usize);
            }
            if inner.is_zero() {
                continue;
            }
            acc += &inner.mul_biguint(&row[j]);
        }
        if acc.bits() > opts.max_bits {
            return Err(Error::Unreliable(format!(
                "exact recurrence exceeded {} bits at k = {}",
                opts.max_bits,
                i + 2
            )));
        }
        f.push(-acc);
    }

    // c_i = F_i / (T · D^i · i!)
    let mut inv_fact = ScaledComplex::ONE;
    let coeffs = f
        .iter()
        .enumerate()
        .map(|(i, fi)| {
            if i > 1 {
                inv_fact = inv_fact.scale(1.0 / i as f64);
            }
            let (m, e) = fi.to_scaled().raw_parts();
            ScaledComplex::from_raw_parts(m, e - t as i64 - s as i64 * i as i64) * inv_fact
        })
        .collect();
    Ok(PowerSeries::new(coeffs))
}
