//! Logarithmic derivative `u = f'/f` along a ray.
//!
//! With `z = r e^{iθ}` and `w = e^{iθ}`, a solution of `f'' + A f' + B f = 0`
//! gives `du/dr = w (−u² − A u − B)` and `d/dr log f = w u`. Deep inside
//! sectors where `|A|` is huge the equation is extremely stiff, so it is
//! integrated with the 3-stage Radau IIA method (order 5, L-stable), full
//! Newton on the stage equations and step-doubling error control.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::poly::ComplexPoly;
use crate::scaled::{sum_with_max, ScaledComplex};

/// `|u|` beyond which a pole of `u` (a zero of `f`) is reported.
pub const POLE_THRESHOLD: f64 = 1e8;
/// Coefficient modulus beyond which the ray is abandoned.
pub const OVERFLOW_THRESHOLD: f64 = 1e300;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TraceStatus {
    Completed,
    /// `|u|` exceeded [`POLE_THRESHOLD`]; `f` has a zero just past `last_good_radius`.
    PoleEncountered {
        last_good_radius: f64,
    },
    /// `|A|` or `|B|` exceeded [`OVERFLOW_THRESHOLD`].
    OverflowRegion {
        radius: f64,
    },
    StepLimit {
        radius: f64,
    },
    StepUnderflow {
        radius: f64,
    },
}

/// `u` sampled along one ray.
#[derive(Clone, Debug, Serialize)]
pub struct RayTrace {
    pub theta: f64,
    /// Strictly increasing.
    pub radii: Vec<f64>,
    pub values: Vec<Complex64>,
    /// `∫ u dz` from the first radius, i.e. `log f(z) − log f(z_start)`.
    pub log_ratio: Vec<Complex64>,
    /// `f` at the first radius when known; 1 otherwise.
    pub f_start: Complex64,
    pub status: TraceStatus,
    pub steps: usize,
    pub rejected_steps: usize,
}

impl RayTrace {
    pub fn last_radius(&self) -> f64 {
        self.radii.last().copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug)]
pub struct RiccatiOptions {
    pub r_start: f64,
    pub f_start: Complex64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Number of log-spaced checkpoints after `r_start`.
    pub checkpoints: usize,
}

impl Default for RiccatiOptions {
    fn default() -> Self {
        Self {
            r_start: 0.0,
            f_start: Complex64::new(1.0, 0.0),
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 10_000_000,
            checkpoints: 200,
        }
    }
}

/// Right-hand side `−u² − A u − B` with `A` and `B` merged term by term, so
/// that a coefficient cancelling exactly (as it does at a fixed point such as
/// `u = 1` for `A = e^z`, `B = −e^z − 1`) contributes an exact zero.
struct Field {
    // (k, Q, α, β): term z^k e^{Q} with coefficient α in A and β in B
    terms: Vec<(u32, ComplexPoly, Complex64, Complex64)>,
    constant_index: usize,
    w: Complex64,
    theta: f64,
}

struct FieldAt {
    // per-term value z^k e^{Q(z)}
    basis: Vec<ScaledComplex>,
    a: Complex64,
}

impl Field {
    fn new(a: &ExpPoly, b: &ExpPoly, theta: f64) -> Self {
        let mut terms: Vec<(u32, ComplexPoly, Complex64, Complex64)> = Vec::new();
        let zero = Complex64::new(0.0, 0.0);
        let mut add = |k: u32, q: &ComplexPoly, alpha: Complex64, beta: Complex64| {
            if let Some(t) = terms.iter_mut().find(|t| t.0 == k && t.1 == *q) {
                t.2 += alpha;
                t.3 += beta;
            } else {
                terms.push((k, q.clone(), alpha, beta));
            }
        };
        for t in a.terms() {
            add(t.power, &t.exponent, t.coeff, zero);
        }
        for t in b.terms() {
            add(t.power, &t.exponent, zero, t.coeff);
        }
        add(0, &ComplexPoly::zero(), zero, zero);
        let constant_index = terms
            .iter()
            .position(|t| t.0 == 0 && t.1.is_zero())
            .expect("added above");
        Self {
            terms,
            constant_index,
            w: Complex64::from_polar(1.0, theta),
            theta,
        }
    }

    /// Evaluates the basis at radius `r`; `None` in the overflow region.
    fn at(&self, r: f64) -> Option<FieldAt> {
        let z = ScaledComplex::new(Complex64::from_polar(r, self.theta));
        let limit = OVERFLOW_THRESHOLD.ln();
        let mut basis = Vec::with_capacity(self.terms.len());
        let mut a_terms = Vec::new();
        let mut b_terms = Vec::new();
        for (k, q, alpha, beta) in &self.terms {
            let v = if *k == 0 {
                ScaledComplex::ONE
            } else {
                z.powi(*k)
            } * ScaledComplex::exp(q.eval(z.to_complex()));
            if alpha.norm() > 0.0 {
                a_terms.push(v.mul_complex(*alpha));
            }
            if beta.norm() > 0.0 {
                b_terms.push(v.mul_complex(*beta));
            }
            basis.push(v);
        }
        let a = sum_with_max(&a_terms).0;
        let b = sum_with_max(&b_terms).0;
        if a.magnitude_log() > limit || b.magnitude_log() > limit {
            return None;
        }
        // individual basis terms may still exceed the range when they cancel
        if basis.iter().any(|v| v.magnitude_log() > limit + 50.0) {
            return None;
        }
        Some(FieldAt {
            basis,
            a: a.to_complex(),
        })
    }

    fn eval(&self, at: &FieldAt, u: Complex64) -> Complex64 {
        let mut parts = Vec::with_capacity(self.terms.len());
        for (i, (_, _, alpha, beta)) in self.terms.iter().enumerate() {
            let mut c = -(alpha * u) - beta;
            if i == self.constant_index {
                c -= u * u;
            }
            if c.norm() > 0.0 {
                parts.push(at.basis[i].mul_complex(c));
            }
        }
        self.w * sum_with_max(&parts).0.to_complex()
    }

    fn jac(&self, at: &FieldAt, u: Complex64) -> Complex64 {
        self.w * (-2.0 * u - at.a)
    }
}

const S6: f64 = 2.449_489_742_783_178;

/// Radau IIA (s = 3) tableau.
pub(crate) struct Tableau {
    pub c: [f64; 3],
    pub a: [[f64; 3]; 3],
}

pub(crate) fn radau3() -> Tableau {
    Tableau {
        c: [(4.0 - S6) / 10.0, (4.0 + S6) / 10.0, 1.0],
        a: [
            [
                (88.0 - 7.0 * S6) / 360.0,
                (296.0 - 169.0 * S6) / 1800.0,
                (-2.0 + 3.0 * S6) / 225.0,
            ],
            [
                (296.0 + 169.0 * S6) / 1800.0,
                (88.0 + 7.0 * S6) / 360.0,
                (-2.0 - 3.0 * S6) / 225.0,
            ],
            [(16.0 - S6) / 36.0, (16.0 + S6) / 36.0, 1.0 / 9.0],
        ],
    }
}

/// Solves a 3×3 complex system by Gaussian elimination with partial pivoting.
/// The system is first scaled by its largest entry: complex division squares
/// moduli and would overflow for the `h·A ~ 1e160` entries met deep in the growth sectors.
fn solve3(mut m: [[Complex64; 3]; 3], mut rhs: [Complex64; 3]) -> Option<[Complex64; 3]> {
    let big = m.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    if !big.is_finite() {
        return None;
    }
    if big > 1.0 {
        let s = 1.0 / big;
        m.iter_mut().flatten().for_each(|v| *v *= s);
        rhs.iter_mut().for_each(|v| *v *= s);
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))?;
        if m[piv][col].norm() == 0.0 || !m[piv][col].norm().is_finite() {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
            let v = rhs[col];
            rhs[row] -= f * v;
        }
    }
    let mut x = [Complex64::new(0.0, 0.0); 3];
    for row in (0..3).rev() {
        let mut s = rhs[row];
        for k in row + 1..3 {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    Some(x)
}

struct StepResult {
    u: Complex64,
    dlog: Complex64,
}

enum StepFailure {
    Overflow(f64),
    NoConvergence,
}

fn radau_step(
    field: &Field,
    tab: &Tableau,
    r: f64,
    h: f64,
    u: Complex64,
) -> Result<StepResult, StepFailure> {
    let mut ats = Vec::with_capacity(3);
    for &c in &tab.c {
        let rr = r + c * h;
        ats.push(field.at(rr).ok_or(StepFailure::Overflow(rr))?);
    }
    let mut stages = [u; 3];
    let one = Complex64::new(1.0, 0.0);
    for _ in 0..30 {
        let f: Vec<Complex64> = (0..3).map(|j| field.eval(&ats[j], stages[j])).collect();
        let jac: Vec<Complex64> = (0..3).map(|j| field.jac(&ats[j], stages[j])).collect();
        let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
        let mut g = [Complex64::new(0.0, 0.0); 3];
        for i in 0..3 {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..3 {
                s += tab.a[i][j] * f[j];
                m[i][j] = -h * tab.a[i][j] * jac[j];
            }
            m[i][i] += one;
            g[i] = -(stages[i] - u - h * s);
        }
        let delta = solve3(m, g).ok_or(StepFailure::NoConvergence)?;
        let mut size = 0.0f64;
        for i in 0..3 {
            stages[i] += delta[i];
            size = size.max(delta[i].norm() / (1.0 + stages[i].norm()));
        }
        if !size.is_finite() {
            return Err(StepFailure::NoConvergence);
        }
        if size <= 1e-15 {
            let dlog = h
                * field.w
                * (tab.a[2][0] * stages[0] + tab.a[2][1] * stages[1] + tab.a[2][2] * stages[2]);
            return Ok(StepResult { u: stages[2], dlog });
        }
    }
    Err(StepFailure::NoConvergence)
}

fn checkpoints(r_start: f64, r_max: f64, count: usize) -> Vec<f64> {
    let lo = if r_start > 0.0 {
        r_start
    } else {
        (r_max * 1e-3).min(1e-2)
    };
    let mut out: Vec<f64> = (1..=count.max(1))
        .map(|i| lo * (r_max / lo).powf(i as f64 / count.max(1) as f64))
        .filter(|&r| r > r_start)
        .collect();
    if let Some(last) = out.last_mut() {
        *last = r_max;
    }
    out
}

/// Integrates `u = f'/f` along `θ` from `opts.r_start` (where `u = u0`) to
/// `r_max`.
pub fn riccati_trace(
    a: &ExpPoly,
    b: &ExpPoly,
    theta: f64,
    u0: Complex64,
    r_max: f64,
    opts: &RiccatiOptions,
) -> Result<RayTrace> {
    if !(u0.re.is_finite() && u0.im.is_finite()) {
        return Err(Error::InvalidArgument(
            "initial u must be finite (f(start) ≠ 0)".into(),
        ));
    }
    if !(r_max > opts.r_start && opts.r_start >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 ≤ r_start < r_max, got {} and {r_max}",
            opts.r_start
        )));
    }
    let field = Field::new(a, b, theta);
    let tab = radau3();
    let mut trace = RayTrace {
        theta,
        radii: vec![opts.r_start],
        values: vec![u0],
        log_ratio: vec![Complex64::new(0.0, 0.0)],
        f_start: opts.f_start,
        status: TraceStatus::Completed,
        steps: 0,
        rejected_steps: 0,
    };
    if field.at(opts.r_start).is_none() {
        trace.status = TraceStatus::OverflowRegion {
            radius: opts.r_start,
        };
        return Ok(trace);
    }
    let mut r = opts.r_start;
    let mut u = u0;
    let mut log = Complex64::new(0.0, 0.0);
    let mut h = (r_max - r).min(1e-3 * (1.0 + r));
    let mut last_good = r;
    for target in checkpoints(opts.r_start, r_max, opts.checkpoints) {
        while r < target {
            if trace.steps + trace.rejected_steps >= opts.max_steps {
                trace.status = TraceStatus::StepLimit { radius: r };
                return Ok(trace);
            }
            let hh = h.min(target - r);
            if hh < 1e-14 * (1.0 + r) {
                trace.status = if u.norm() > 1e4 {
                    TraceStatus::PoleEncountered {
                        last_good_radius: last_good,
                    }
                } else {
                    TraceStatus::StepUnderflow { radius: r }
                };
                return Ok(trace);
            }
            let full = radau_step(&field, &tab, r, hh, u);
            let half = radau_step(&field, &tab, r, 0.5 * hh, u).and_then(|s1| {
                radau_step(&field, &tab, r + 0.5 * hh, 0.5 * hh, s1.u).map(|s2| (s1, s2))
            });
            let (full, (s1, s2)) = match (full, half) {
                (Ok(f), Ok(p)) => (f, p),
                (Err(StepFailure::Overflow(rr)), _) | (_, Err(StepFailure::Overflow(rr)))
                    if hh <= 1e-9 * (1.0 + r) =>
                {
                    trace.status = TraceStatus::OverflowRegion { radius: rr };
                    return Ok(trace);
                }
                _ => {
                    trace.rejected_steps += 1;
                    h = 0.25 * hh;
                    continue;
                }
            };
            let err = (s2.u - full.u).norm() / 31.0;
            let sc = opts.atol + opts.rtol * u.norm().max(s2.u.norm());
            let errn = err / sc;
            if !errn.is_finite() || errn > 1.0 {
                trace.rejected_steps += 1;
                let fac = if errn.is_finite() {
                    (0.9 * errn.powf(-1.0 / 6.0)).clamp(0.2, 1.0)
                } else {
                    0.2
                };
                h = hh * fac;
                continue;
            }
            trace.steps += 1;
            r += hh;
            u = s2.u;
            log += s1.dlog + s2.dlog;
            let fac = if errn > 0.0 {
                (0.9 * errn.powf(-1.0 / 6.0)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            h = hh * fac;
            if u.norm() > POLE_THRESHOLD {
                trace.status = TraceStatus::PoleEncountered {
                    last_good_radius: last_good,
                };
                return Ok(trace);
            }
            last_good = r;
        }
        trace.radii.push(target);
        trace.values.push(u);
        trace.log_ratio.push(log);
    }
    Ok(trace)
}
