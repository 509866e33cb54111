//! Ray-wise numerical checks: growth exponents along rays, the lower bound
//! on `|A|` in terms of `δ(P,θ)`, logarithmic-derivative bounds for finite
//! order solutions, Riccati traces of `f'/f` and ray limits of `f`.

mod riccati;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::fit::linear_fit;
use crate::poly::ComplexPoly;
use crate::rays::{self, Membership};
use crate::series::{eval_at, PointValue, PowerSeries};

pub use riccati::{
    riccati_trace, RayTrace, RiccatiOptions, TraceStatus, OVERFLOW_THRESHOLD, POLE_THRESHOLD,
};

/// Only radii with `|log|g|| ≥` this enter an exponent fit.
pub const MIN_ABS_LOG: f64 = 10.0;
/// Largest RMS deviation for a fit to count as a clean power law.
pub const MAX_FIT_RESIDUAL: f64 = 0.05;
/// Allowed distance between a fitted exponent and the exact order.
pub const EXPONENT_TOL: f64 = 0.05;

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Index from which every entry passes, provided that run covers at least
/// half of the entries; mirrors "for all `r > R(θ)`" on a finite grid.
fn eventual_pass(flags: &[bool]) -> Option<usize> {
    if flags.is_empty() {
        return None;
    }
    let start = flags.iter().rposition(|&p| !p).map_or(0, |i| i + 1);
    (2 * (flags.len() - start) >= flags.len()).then_some(start)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GrowthClass {
    BlowsUp,
    Decays,
    Neither,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthVerdict {
    pub theta: f64,
    /// Slope of `ln|ln|g||` against `ln r`; NaN without enough usable radii.
    pub exponent: f64,
    pub classification: GrowthClass,
    pub fit_residual: f64,
    pub expected_order: usize,
    pub radii_used: usize,
    /// `ln|g|` at the largest radius.
    pub final_log: f64,
    pub flags: Vec<String>,
}

/// Growth exponent of `g` along `θ` from `samples` log-spaced radii in
/// `[r_lo, r_hi]`.
pub fn growth_exponent(
    g: &ExpPoly,
    theta: f64,
    r_lo: f64,
    r_hi: f64,
    samples: usize,
) -> Result<GrowthVerdict> {
    let expected = g.exact_order()?;
    if !(r_lo > 0.0 && r_hi / r_lo >= 100.0) {
        return Err(Error::InvalidArgument(format!(
            "need r_hi/r_lo ≥ 100, got [{r_lo}, {r_hi}]"
        )));
    }
    if samples < 20 {
        return Err(Error::InvalidArgument(format!(
            "need at least 20 samples, got {samples}"
        )));
    }
    let radii = log_spaced(r_lo, r_hi, samples);
    let logs: Vec<f64> = radii
        .iter()
        .map(|&r| g.eval_polar(r, theta).magnitude_log())
        .collect();
    let mut flags = Vec::new();
    if logs.iter().any(|l| !l.is_finite()) {
        flags.push("g vanishes or overflows at some sampled radius".to_string());
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = radii
        .iter()
        .zip(&logs)
        .filter(|(_, l)| l.is_finite() && l.abs() >= MIN_ABS_LOG)
        .map(|(r, l)| (r.ln(), l.abs().ln()))
        .unzip();
    let final_log = *logs.last().expect("samples ≥ 20");
    let mut verdict = GrowthVerdict {
        theta,
        exponent: f64::NAN,
        classification: GrowthClass::Neither,
        fit_residual: f64::NAN,
        expected_order: expected,
        radii_used: xs.len(),
        final_log,
        flags,
    };
    if xs.len() < 3 {
        verdict
            .flags
            .push(format!("|log|g|| stays below {MIN_ABS_LOG} along the ray"));
        return Ok(verdict);
    }
    let fit = linear_fit(&xs, &ys).expect("distinct radii");
    verdict.exponent = fit.slope;
    verdict.fit_residual = fit.rms_residual;
    if expected == 0 {
        verdict
            .flags
            .push("g has order 0; exponential growth is undefined".into());
        return Ok(verdict);
    }
    if !(final_log.is_finite() && final_log.abs() >= MIN_ABS_LOG) {
        verdict
            .flags
            .push("largest radius not in the fitted range".into());
        return Ok(verdict);
    }
    let tail = &logs[logs.len() - 3..];
    let same_sign = tail.iter().all(|l| l.signum() == final_log.signum());
    if fit.rms_residual >= MAX_FIT_RESIDUAL {
        verdict
            .flags
            .push(format!("fit residual {:.3} too large", fit.rms_residual));
    }
    if (fit.slope - expected as f64).abs() > EXPONENT_TOL {
        verdict.flags.push(format!(
            "exponent {:.4} differs from order {expected}",
            fit.slope
        ));
    }
    if !same_sign {
        verdict
            .flags
            .push("sign of log|g| changes at the largest radii".into());
    }
    if verdict.flags.is_empty()
        || (verdict.flags.len() == 1 && verdict.flags[0].starts_with("g vanishes"))
    {
        verdict.classification = if final_log > 0.0 {
            GrowthClass::BlowsUp
        } else {
            GrowthClass::Decays
        };
    }
    Ok(verdict)
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma3Report {
    pub theta: f64,
    pub eps: f64,
    pub membership: Membership,
    pub delta: f64,
    pub radii: Vec<f64>,
    pub log_abs_a: Vec<f64>,
    /// `ln|A| − (1−ε) δ rⁿ`.
    pub margins: Vec<f64>,
    pub pass: bool,
    /// First radius of the final run of non-negative margins.
    pub r_theta: Option<f64>,
}

/// Margins of `|A(re^{iθ})| ≥ exp((1−ε) δ(P,θ) rⁿ)` at the given radii.
pub fn lemma3_margin(
    a: &ExpPoly,
    p: &ComplexPoly,
    theta: f64,
    eps: f64,
    radii: &[f64],
) -> Result<Lemma3Report> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("ε = {eps} not in (0, 1)")));
    }
    let part = rays::partition(p)?;
    let membership = part.membership(theta);
    if membership == Membership::Critical {
        return Err(Error::CriticalRay { theta });
    }
    let n = part.n as i32;
    let delta = rays::delta(p, theta)?;
    let log_abs_a: Vec<f64> = radii
        .iter()
        .map(|&r| a.eval_polar(r, theta).magnitude_log())
        .collect();
    let margins: Vec<f64> = radii
        .iter()
        .zip(&log_abs_a)
        .map(|(&r, &l)| l - (1.0 - eps) * delta * r.powi(n))
        .collect();
    let ok: Vec<bool> = margins.iter().map(|&m| m >= 0.0).collect();
    let start = eventual_pass(&ok);
    Ok(Lemma3Report {
        theta,
        eps,
        membership,
        delta,
        radii: radii.to_vec(),
        log_abs_a,
        pass: start.is_some(),
        r_theta: start.and_then(|i| radii.get(i).copied()),
        margins,
    })
}

pub const LEMMA1_CAVEAT: &str =
    "the derivative-ratio bound is only asserted outside an exceptional set of rays of linear measure zero";
pub const LEMMA1_PAIRS: [(u8, u8); 3] = [(2, 0), (1, 0), (2, 1)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma1Point {
    pub k: u8,
    pub j: u8,
    pub r: f64,
    /// Lower end of `ln|f^{(k)}/f^{(j)}|` after evaluation error.
    pub ratio_log: f64,
    pub bound_log: f64,
    pub status: CheckStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma1Report {
    pub theta: f64,
    pub rho: f64,
    pub eps: f64,
    pub points: Vec<Lemma1Point>,
    pub pass: bool,
    pub caveat: &'static str,
}

/// `ln` of the lower and upper ends of `|value|` given its error bound;
/// `None` for the lower end when the error swamps the value.
fn magnitude_range(v: &PointValue) -> (Option<f64>, f64) {
    if v.max_term.is_zero() {
        return (Some(f64::NEG_INFINITY), f64::NEG_INFINITY);
    }
    let l = v.value.magnitude_log();
    let e = v.error_bound_log();
    let rel = (e - l).exp();
    let lo = (rel < 1.0).then(|| l + (1.0 - rel).ln());
    (lo, l.max(e) + (1.0 + (-(l - e).abs()).exp()).ln())
}

/// Checks `|f^{(k)}/f^{(j)}| ≤ r^{(k−j)(ρ−1+ε)}` for the three derivative
/// pairs at each radius. Radii where the truncated series cannot resolve
/// the ratio are skipped.
pub fn lemma1_check(
    f: &PowerSeries,
    theta: f64,
    rho: f64,
    eps: f64,
    radii: &[f64],
) -> Result<Lemma1Report> {
    if !(eps > 0.0) || !rho.is_finite() || rho < 0.0 {
        return Err(Error::InvalidArgument("need ε > 0 and finite ρ ≥ 0".into()));
    }
    let d1 = f.derivative();
    let d2 = d1.derivative();
    let derivs = [f, &d1, &d2];
    let mut points = Vec::new();
    for &r in radii {
        let z = Complex64::from_polar(r, theta);
        let vals: Vec<PointValue> = derivs.iter().map(|s| eval_at(s, z)).collect();
        for (k, j) in LEMMA1_PAIRS {
            let (num, den) = (&vals[k as usize], &vals[j as usize]);
            let bound_log = (k - j) as f64 * (rho - 1.0 + eps) * r.ln();
            let (num_lo, _) = magnitude_range(num);
            let (den_lo, den_hi) = magnitude_range(den);
            let reliable =
                num.tail_ok() && den.tail_ok() && den_lo.is_some_and(|d| d > f64::NEG_INFINITY);
            let ratio_log = match num_lo {
                Some(n) => n - den_hi,
                None => f64::NEG_INFINITY,
            };
            let status = if !reliable {
                CheckStatus::Skipped
            } else if ratio_log <= bound_log {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            };
            points.push(Lemma1Point {
                k,
                j,
                r,
                ratio_log,
                bound_log,
                status,
            });
        }
    }
    let pass = LEMMA1_PAIRS.iter().all(|&(k, j)| {
        let flags: Vec<bool> = points
            .iter()
            .filter(|p| p.k == k && p.j == j && p.status != CheckStatus::Skipped)
            .map(|p| p.status == CheckStatus::Pass)
            .collect();
        eventual_pass(&flags).is_some()
    });
    Ok(Lemma1Report {
        theta,
        rho,
        eps,
        points,
        pass,
        caveat: LEMMA1_CAVEAT,
    })
}

pub const SWEEP_RAYS: usize = 64;
pub const SWEEP_REQUIRED: usize = 60;

#[derive(Clone, Debug, Serialize)]
pub struct Lemma1Sweep {
    pub rays: Vec<(f64, bool)>,
    pub passes: usize,
    pub required: usize,
    pub pass: bool,
    pub caveat: &'static str,
}

/// [`lemma1_check`] on `count` equally spaced rays offset by `phase`
/// (a fraction of the spacing); passes when at least `required` rays do.
pub fn lemma1_sweep(
    f: &PowerSeries,
    rho: f64,
    eps: f64,
    radii: &[f64],
    count: usize,
    phase: f64,
    required: usize,
) -> Result<Lemma1Sweep> {
    let results: Vec<Result<(f64, bool)>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let theta = std::f64::consts::TAU * (i as f64 + phase) / count as f64;
            lemma1_check(f, theta, rho, eps, radii).map(|r| (theta, r.pass))
        })
        .collect();
    let rays = results.into_iter().collect::<Result<Vec<_>>>()?;
    let passes = rays.iter().filter(|r| r.1).count();
    Ok(Lemma1Sweep {
        rays,
        passes,
        required,
        pass: passes >= required,
        caveat: LEMMA1_CAVEAT,
    })
}

/// Largest admissible bound on the neglected tail `∫_{r_max}^∞ |u|`.
pub const LEMMA2_TAIL_BOUND: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct Lemma2Result {
    pub c: Complex64,
    pub valid: bool,
    /// Log-log slope of `|u|` over the tail; `-inf` when `u ≡ 0` there.
    pub decay_exponent: f64,
    /// `max |u| r^α` over the tail.
    pub tail_constant: f64,
    /// `C r_max^{1−α}/(α−1)`.
    pub tail_bound: f64,
    pub reason: Option<String>,
}

/// Limit of `f` along the traced ray, `f(r_start) exp(∫u dz)`, valid when the
/// tail of the trace decays like `r^{−α}` fast enough to bound the rest.
pub fn lemma2_limit(trace: &RayTrace, alpha: f64) -> Result<Lemma2Result> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidArgument(format!("α = {alpha} must exceed 1")));
    }
    if trace.radii.len() < 2 {
        return Err(Error::InvalidArgument(
            "trace has fewer than two radii".into(),
        ));
    }
    let r_max = trace.last_radius();
    let c = trace.f_start * trace.log_ratio.last().expect("non-empty").exp();
    let mut out = Lemma2Result {
        c,
        valid: false,
        decay_exponent: f64::NAN,
        tail_constant: f64::NAN,
        tail_bound: f64::NAN,
        reason: None,
    };
    if trace.status != TraceStatus::Completed {
        out.reason = Some(format!("trace stopped early: {:?}", trace.status));
        return Ok(out);
    }
    let tail: Vec<(f64, f64)> = trace
        .radii
        .iter()
        .zip(&trace.values)
        .filter(|(r, _)| **r >= 0.5 * r_max && **r > 0.0)
        .map(|(r, u)| (*r, u.norm()))
        .collect();
    out.tail_constant = tail
        .iter()
        .map(|(r, u)| u * r.powf(alpha))
        .fold(0.0, f64::max);
    out.tail_bound = out.tail_constant * r_max.powf(1.0 - alpha) / (alpha - 1.0);
    let nonzero: Vec<(f64, f64)> = tail
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(r, u)| (r.ln(), u.ln()))
        .collect();
    if nonzero.is_empty() {
        out.decay_exponent = f64::NEG_INFINITY;
        out.valid = true;
        return Ok(out);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = nonzero.into_iter().unzip();
    out.decay_exponent = linear_fit(&xs, &ys).map_or(f64::NAN, |f| f.slope);
    if !(out.decay_exponent <= -(alpha - 0.05)) {
        out.reason = Some(format!(
            "measured decay exponent {:.3} does not reach −{alpha}",
            out.decay_exponent
        ));
    } else if !(out.tail_bound < LEMMA2_TAIL_BOUND) {
        out.reason = Some(format!(
            "tail bound {:.3e} not below {LEMMA2_TAIL_BOUND:e}",
            out.tail_bound
        ));
    } else {
        out.valid = true;
    }
    Ok(out)
}

/// `(u, f)` at `r e^{iθ}` from a Taylor series, for starting a trace where
/// `f(0) = 0`. `None` when the series is not reliable there or `f` vanishes.
pub fn series_start(f: &PowerSeries, theta: f64, r: f64) -> Option<(Complex64, Complex64)> {
    let z = Complex64::from_polar(r, theta);
    let v = eval_at(f, z);
    let d = eval_at(&f.derivative(), z);
    if !(v.tail_ok() && d.tail_ok()) || v.value.is_zero() {
        return None;
    }
    if v.error_bound_log() - v.value.magnitude_log() > (1e-10f64).ln() {
        return None;
    }
    let fv = v.value.try_to_complex()?;
    let dv = d.value.try_to_complex()?;
    Some((dv / fv, fv))
}
