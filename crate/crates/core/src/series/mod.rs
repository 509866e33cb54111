//! Truncated power series and the Taylor-coefficient solution of
//! `f'' + A f' + B f = 0` about the ordinary point `z = 0`.
//!
//! Two arithmetic routes produce the coefficients:
//!
//! * the scaled-float recurrence ([`taylor_solve`]), fast and accurate for
//!   solutions that dominate the recurrence;
//! * an exact Gaussian-integer recurrence ([`exact::solve_exact`]) in the
//!   exponential-generating-function basis, needed for minimal solutions
//!   (the finite-order ones), where every step cancels almost all digits.
//!
//! [`solve_ode`] runs the float route, estimates its error amplification and
//! re-solves exactly when the float recurrence turns out to amplify rounding
//! errors beyond use.

pub mod exact;
mod growth;
mod order;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::scaled::{sum_with_max, ScaledComplex};

pub use growth::{
    eval_at, eval_on_circle, max_term_and_central_index, order_from_modulus, CircleEstimate,
    ModulusOrder, PointValue,
};
pub use order::{
    order_from_coeffs, running_order, OrderEstimate, RunningOrder, DEFAULT_WINDOW, MIN_TAIL_COEFFS,
};

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PowerSeries {
    coeffs: Vec<ScaledComplex>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<ScaledComplex>) -> Self {
        Self { coeffs }
    }

    pub fn from_complex(coeffs: &[Complex64]) -> Self {
        Self::new(coeffs.iter().map(|&c| ScaledComplex::new(c)).collect())
    }

    /// Zero series with truncation order `n`.
    pub fn zeros(n: usize) -> Self {
        Self::new(vec![ScaledComplex::ZERO; n + 1])
    }

    pub fn coeffs(&self) -> &[ScaledComplex] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> ScaledComplex {
        self.coeffs.get(k).copied().unwrap_or(ScaledComplex::ZERO)
    }

    /// Truncation order `N` (index of the last stored coefficient).
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn truncate(&self, n: usize) -> Self {
        Self::new(self.coeffs.iter().take(n + 1).copied().collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().min(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeffs[k] + other.coeffs[k]).collect())
    }

    pub fn scale(&self, s: ScaledComplex) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Cauchy product, truncated to the shorter operand.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut buf = Vec::with_capacity(n);
        let out = (0..n)
            .map(|k| {
                buf.clear();
                buf.extend((0..=k).map(|j| self.coeffs[j] * other.coeffs[k - j]));
                sum_with_max(&buf).0
            })
            .collect();
        Self::new(out)
    }

    /// Multiplication by `z^k`, keeping the truncation order.
    pub fn shift(&self, k: usize) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![ScaledComplex::ZERO; n];
        for i in k..n {
            out[i] = self.coeffs[i - k];
        }
        Self::new(out)
    }

    /// Term-wise derivative; the truncation order drops by one.
    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.scale(k as f64))
                .collect(),
        )
    }

    /// Highest index with a nonzero coefficient.
    pub fn last_nonzero(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }
}

/// Taylor coefficients of `e^{q(z)}` through `z^n`, from `g' = q'·g`.
fn exp_series(q: &crate::poly::ComplexPoly, n: usize) -> Vec<ScaledComplex> {
    let dq: Vec<ScaledComplex> = q
        .derivative()
        .coeffs()
        .iter()
        .map(|&c| ScaledComplex::new(c))
        .collect();
    let mut g = Vec::with_capacity(n + 1);
    g.push(ScaledComplex::exp(q.coeff(0)));
    let mut buf = Vec::with_capacity(dq.len());
    for m in 0..n {
        // (m+1) g_{m+1} = Σ_l dq_l g_{m-l}
        buf.clear();
        buf.extend(
            dq.iter()
                .enumerate()
                .take(m + 1)
                .map(|(l, d)| *d * g[m - l]),
        );
        g.push(sum_with_max(&buf).0.scale(1.0 / (m + 1) as f64));
    }
    g
}

/// Taylor coefficients of an exponential polynomial through `z^n`.
pub fn series_of(e: &ExpPoly, n: usize) -> PowerSeries {
    let mut out = vec![Vec::new(); n + 1];
    for t in e.terms() {
        let k = t.power as usize;
        if k > n {
            continue;
        }
        let c = ScaledComplex::new(t.coeff);
        for (i, g) in exp_series(&t.exponent, n - k).into_iter().enumerate() {
            out[i + k].push(c * g);
        }
    }
    PowerSeries::new(out.iter().map(|v| sum_with_max(v).0).collect())
}

/// Which arithmetic produced a solution's coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    Float,
    Exact,
}

/// Arithmetic policy for [`solve_ode`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ArithmeticPolicy {
    /// Float first; exact when the float route amplifies rounding too much.
    #[default]
    Auto,
    Float,
    Exact,
}

/// Error amplification (in bits) above which the float route is abandoned.
/// Plain rounding then costs more than `2^-52 · 2^24 ≈ 4e-9` relative.
pub const AMPLIFICATION_LIMIT_BITS: f64 = 24.0;

/// Relative size of the nudge applied to every coefficient of the probe run.
const PROBE_NUDGE: f64 = 1.0 / (1u64 << 40) as f64;

#[derive(Clone, Debug)]
pub struct Solution {
    pub series: PowerSeries,
    pub arithmetic: Arithmetic,
    /// `log2` of how much a relative perturbation of each step grows by the
    /// end of the float recurrence; a measure of its instability. Zero for
    /// exact solutions.
    pub amplification_bits: f64,
    /// First index where the amplification exceeded
    /// [`AMPLIFICATION_LIMIT_BITS`].
    pub first_unstable_index: Option<usize>,
}

fn recurrence(
    a: &[ScaledComplex],
    b: &[ScaledComplex],
    f0: Complex64,
    f1: Complex64,
    n: usize,
    nudge: f64,
) -> (Vec<ScaledComplex>, Vec<f64>) {
    let mut c = Vec::with_capacity(n + 1);
    // ln of the largest contribution to each c_k, after the division
    let mut input_log = vec![f64::NEG_INFINITY; 2];
    c.push(ScaledComplex::new(f0));
    c.push(ScaledComplex::new(f1));
    // dc[j] = (j+1) c_{j+1}
    let mut dc = vec![ScaledComplex::new(f1)];
    let mut buf = Vec::with_capacity(2 * n + 2);
    for k in 0..=n - 2 {
        buf.clear();
        for j in 0..=k {
            buf.push(dc[j] * a[k - j]);
            buf.push(c[j] * b[k - j]);
        }
        let sign = if k % 3 == 1 { -1.0 } else { 1.0 };
        let factor = (1.0 + sign * nudge) / ((k + 2) as f64 * (k + 1) as f64);
        let (sum, largest) = sum_with_max(&buf);
        let next = -sum.scale(factor);
        input_log.push(largest.magnitude_log() + factor.abs().ln());
        c.push(next);
        dc.push(next.scale((k + 2) as f64));
    }
    (c, input_log)
}

/// Float-route solution of `f'' + A f' + B f = 0`, `f(0)=f0`, `f'(0)=f1`,
/// from the coefficient recurrence
///
/// `(k+2)(k+1) c_{k+2} = −Σ_{j≤k} [(j+1) c_{j+1} A_{k−j} + c_j B_{k−j}]`.
///
/// A second run nudges every computed coefficient by a relative `2^-40`;
/// how far the two runs drift apart measures the error amplification.
pub fn taylor_solve(
    a: &PowerSeries,
    b: &PowerSeries,
    f0: Complex64,
    f1: Complex64,
    n: usize,
) -> Result<Solution> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "truncation order must be at least 2".into(),
        ));
    }
    if a.order() < n || b.order() < n {
        return Err(Error::InvalidArgument(
            "coefficient series shorter than the truncation order".into(),
        ));
    }
    let (c, input_log) = recurrence(&a.coeffs, &b.coeffs, f0, f1, n, 0.0);
    let (probe, _) = recurrence(&a.coeffs, &b.coeffs, f0, f1, n, PROBE_NUDGE);
    let mut worst = 0.0f64;
    let mut first_unstable = None;
    // Drift is judged against the larger of |c_k|, the largest term summed
    // into it and the running scale of the coefficients, so that isolated
    // zeros (exact or from cancellation) do not register as instability.
    let mut scale_log = f64::NEG_INFINITY;
    for k in 0..=n {
        let l = c[k].magnitude_log();
        scale_log = if k < 2 {
            scale_log.max(l)
        } else {
            l.max(scale_log - 60.0)
        };
        let diff = (probe[k] - c[k]).magnitude_log();
        if diff == f64::NEG_INFINITY || scale_log == f64::NEG_INFINITY {
            continue;
        }
        let reference = l.max(input_log[k]).max(scale_log - 40.0);
        let bits = (diff - reference) / std::f64::consts::LN_2 + 40.0;
        if bits > worst {
            worst = bits;
        }
        if bits > AMPLIFICATION_LIMIT_BITS && first_unstable.is_none() {
            first_unstable = Some(k);
        }
    }
    Ok(Solution {
        series: PowerSeries::new(c),
        arithmetic: Arithmetic::Float,
        amplification_bits: worst,
        first_unstable_index: first_unstable,
    })
}

/// Solves with the arithmetic chosen by `policy`.
pub fn solve_ode(
    a: &ExpPoly,
    b: &ExpPoly,
    f0: Complex64,
    f1: Complex64,
    n: usize,
    policy: ArithmeticPolicy,
) -> Result<Solution> {
    let exact = || -> Result<Solution> {
        let series = exact::solve_exact(a, b, f0, f1, n, &exact::ExactOptions::default())?;
        Ok(Solution {
            series,
            arithmetic: Arithmetic::Exact,
            amplification_bits: 0.0,
            first_unstable_index: None,
        })
    };
    match policy {
        ArithmeticPolicy::Exact => exact(),
        ArithmeticPolicy::Float => taylor_solve(&series_of(a, n), &series_of(b, n), f0, f1, n),
        ArithmeticPolicy::Auto => {
            let float = taylor_solve(&series_of(a, n), &series_of(b, n), f0, f1, n)?;
            if float.first_unstable_index.is_none() {
                return Ok(float);
            }
            exact().map_err(|e| match e {
                Error::Unreliable(msg) => Error::Unreliable(format!(
                    "float recurrence amplifies rounding by 2^{:.0} from k = {} and the exact fallback failed: {msg}",
                    float.amplification_bits,
                    float.first_unstable_index.unwrap_or(0)
                )),
                other => other,
            })
        }
    }
}

/// Plug-back residual of the recurrence, per `k ≤ N−2`, relative to the
/// largest individual product contributing to that coefficient.
pub fn residuals(a: &PowerSeries, b: &PowerSeries, f: &PowerSeries) -> Vec<f64> {
    let n = f.order();
    if n < 2 {
        return Vec::new();
    }
    let c = f.coeffs();
    let mut buf = Vec::with_capacity(2 * n + 3);
    (0..=n - 2)
        .map(|k| {
            buf.clear();
            buf.push(c[k + 2].scale((k + 2) as f64 * (k + 1) as f64));
            for j in 0..=k {
                buf.push(c[j + 1].scale((j + 1) as f64) * a.coeff(k - j));
                buf.push(c[j] * b.coeff(k - j));
            }
            let (sum, largest) = sum_with_max(&buf);
            if largest.is_zero() {
                0.0
            } else {
                (sum.magnitude_log() - largest.magnitude_log()).exp()
            }
        })
        .collect()
}
