//! Maximum term, central index and evaluation of truncated series.

use num_complex::Complex64;
use serde::Serialize;

use super::PowerSeries;
use crate::error::{Error, Result};
use crate::scaled::{sum_with_max, ScaledComplex};

/// Relative tolerance on `ln(|c_k| r^k)` under which two terms count as tied.
const TIE_TOL: f64 = 1e-12;
/// A tail term may be at most this fraction of the maximum term.
const TAIL_REL: f64 = 1e-12;

/// `(μ(r), ν(r))`: the largest `|c_k| r^k` and the largest index attaining it.
pub fn max_term_and_central_index(f: &PowerSeries, r: f64) -> Result<(ScaledComplex, usize)> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "radius {r} must be positive"
        )));
    }
    if f.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let lr = r.ln();
    let mut best = f64::NEG_INFINITY;
    let mut nu = 0;
    for (k, c) in f.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let l = c.magnitude_log() + k as f64 * lr;
        if l >= best - TIE_TOL * best.abs().max(1.0) {
            if l > best {
                best = l;
            }
            nu = k;
        }
    }
    Ok((ScaledComplex::from_log_polar(best, 0.0), nu))
}

/// Value of a truncated series at a point, with the data needed to judge it.
#[derive(Clone, Copy, Debug)]
pub struct PointValue {
    pub value: ScaledComplex,
    /// Largest `|c_k z^k|`.
    pub max_term: ScaledComplex,
    /// Largest `|c_k z^k|` among the last `max(10, N/20)` terms.
    pub tail_term: ScaledComplex,
    pub terms: usize,
}

impl PointValue {
    /// Tail small enough that truncation does not matter.
    pub fn tail_ok(&self) -> bool {
        self.max_term.is_zero()
            || self.tail_term.magnitude_log() - self.max_term.magnitude_log() <= TAIL_REL.ln()
    }

    /// Natural log of a rounding bound `1e−15 (N+1) max_term` plus the tail.
    pub fn error_bound_log(&self) -> f64 {
        let round = self.max_term.magnitude_log() + (1e-15 * self.terms as f64).ln();
        let tail = self.tail_term.magnitude_log() + (self.terms as f64).ln();
        round.max(tail)
    }
}

fn tail_len(n: usize) -> usize {
    10.max(n / 20).min(n + 1)
}

pub fn eval_at(f: &PowerSeries, z: Complex64) -> PointValue {
    let zs = ScaledComplex::new(z);
    let mut pw = ScaledComplex::ONE;
    let terms: Vec<ScaledComplex> = f
        .coeffs()
        .iter()
        .map(|&c| {
            let t = c * pw;
            pw *= zs;
            t
        })
        .collect();
    let (value, max_term) = sum_with_max(&terms);
    let tail_from = terms.len() - tail_len(f.order());
    let tail_term = terms[tail_from..]
        .iter()
        .map(|t| t.abs())
        .max_by(|a, b| a.cmp_abs(b))
        .unwrap_or(ScaledComplex::ZERO);
    PointValue {
        value,
        max_term,
        tail_term,
        terms: terms.len(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CircleEstimate {
    /// `ln M̂(r)`.
    pub magnitude_log: f64,
    /// Angle where the maximum was found.
    pub argmax: f64,
}

/// Estimate of `ln max_{|z|=r} |f(z)|` from `samples` equally spaced angles.
pub fn eval_on_circle(f: &PowerSeries, r: f64, samples: usize) -> Result<CircleEstimate> {
    if !(r > 0.0 && r.is_finite()) || samples == 0 {
        return Err(Error::InvalidArgument(
            "need r > 0 and at least one sample".into(),
        ));
    }
    // Tail check against the maximum term: |c_k| r^k is angle independent.
    let lr = r.ln();
    let logs: Vec<f64> = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| c.magnitude_log() + k as f64 * lr)
        .collect();
    let mu = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tail = logs[logs.len() - tail_len(f.order())..]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if mu > f64::NEG_INFINITY && tail - mu > TAIL_REL.ln() {
        return Err(Error::TruncationInsufficient(format!(
            "tail term at r = {r} is {:.3e} of the maximum term",
            (tail - mu).exp()
        )));
    }
    let mut best = CircleEstimate {
        magnitude_log: f64::NEG_INFINITY,
        argmax: 0.0,
    };
    for s in 0..samples {
        let theta = 2.0 * std::f64::consts::PI * s as f64 / samples as f64;
        let v = eval_at(f, Complex64::from_polar(r, theta))
            .value
            .magnitude_log();
        if v > best.magnitude_log {
            best = CircleEstimate {
                magnitude_log: v,
                argmax: theta,
            };
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct ModulusOrder {
    /// Slope of `ln ln M̂(r)` against `ln r`; NaN if fewer than two usable radii.
    pub order: f64,
    /// `(r, ln ln M̂(r))` for the usable radii.
    pub points: Vec<(f64, f64)>,
    /// Radii dropped because the truncation was insufficient there.
    pub skipped: Vec<f64>,
}

/// Modulus-based order estimate over `radii`; radii where the series is not
/// reliable, or where `ln M̂ ≤ 1`, are skipped.
pub fn order_from_modulus(f: &PowerSeries, radii: &[f64], samples: usize) -> ModulusOrder {
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for &r in radii {
        match eval_on_circle(f, r, samples) {
            Ok(c) if c.magnitude_log > 1.0 => points.push((r, c.magnitude_log.ln())),
            Ok(_) => {}
            Err(_) => skipped.push(r),
        }
    }
    let order = if points.len() >= 2 {
        let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        crate::fit::linear_fit(&xs, &ys)
            .map(|f| f.slope)
            .unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    ModulusOrder {
        order,
        points,
        skipped,
    }
}
