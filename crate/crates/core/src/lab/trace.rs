//! End-to-end run on one instance and one pair of initial conditions.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{classify, theorem_a_check, HypothesisOptions, Prediction, ProblemInstance, Verdict};
use crate::error::{Error, Result};
use crate::parse::render_poly;
use crate::probe::{
    lemma1_check, lemma1_sweep, lemma2_limit, lemma3_margin, riccati_trace, series_start,
    Lemma1Report, Lemma1Sweep, Lemma2Result, Lemma3Report, RayTrace, RiccatiOptions, SWEEP_RAYS,
    SWEEP_REQUIRED,
};
use crate::rays::{self, Membership};
use crate::series::{
    order_from_coeffs, order_from_modulus, residuals, series_of, solve_ode, Arithmetic,
    ArithmeticPolicy, ModulusOrder, OrderEstimate, DEFAULT_WINDOW,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Growth between the estimates at `N/2` and `N` above which the order is
/// read as infinite.
pub const DIVERGENCE_TOL: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct TraceOptions {
    pub policy: ArithmeticPolicy,
    pub r_max: f64,
    pub rays_per_sector: usize,
    /// Exponent of the decay required of `f'/f` for a ray limit.
    pub decay_alpha: f64,
    pub lemma_eps: f64,
    pub circle_samples: usize,
    /// Phase offset, as a fraction of the ray spacing, for a sweep of the
    /// derivative-ratio bound over [`SWEEP_RAYS`] rays; no sweep when `None`.
    pub sweep_phase: Option<f64>,
    pub hypothesis: HypothesisOptions,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            policy: ArithmeticPolicy::Auto,
            r_max: 40.0,
            rays_per_sector: 2,
            decay_alpha: 2.0,
            lemma_eps: 0.5,
            circle_samples: 64,
            sweep_phase: None,
            hypothesis: HypothesisOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ObservedGrowth {
    Finite,
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Consistency {
    Consistent,
    Inconsistent,
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceText {
    pub a: String,
    pub b: String,
    pub d: Option<String>,
    pub p: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionSummary {
    pub f0: Complex64,
    pub f1: Complex64,
    pub truncation: usize,
    pub arithmetic: Arithmetic,
    pub amplification_bits: f64,
    pub max_residual: f64,
    pub order: OrderEstimate,
    /// `(m, estimate)` on the first `m` coefficients for `m = N/4, N/2, 3N/4`,
    /// where the estimator succeeds.
    pub order_checkpoints: Vec<(usize, f64)>,
    pub modulus_order: ModulusOrder,
    pub observed: ObservedGrowth,
}

#[derive(Clone, Debug, Serialize)]
pub struct RayReport {
    pub theta: f64,
    pub membership: Option<Membership>,
    pub trace: Option<RayTrace>,
    /// `lim f` along the ray when the tail of `f'/f` decays fast enough.
    pub limit: Option<Lemma2Result>,
    /// `|A|` lower-bound margins at the trace radii.
    pub a_margin: Option<Lemma3Report>,
    pub log_derivative: Option<Lemma1Report>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub schema_version: u32,
    pub instance: InstanceText,
    /// Combined classification.
    pub verdict: Verdict,
    pub order_comparison: Verdict,
    pub solution: SolutionSummary,
    pub rays: Vec<RayReport>,
    pub log_derivative_sweep: Option<Lemma1Sweep>,
    pub consistency: Consistency,
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Series solution, order estimates, the classification verdict and
/// per-ray Riccati checks, with a consistency flag between the predicted
/// and the observed growth. Errors carry the stage they came from.
pub fn proof_trace(
    inst: &ProblemInstance,
    f0: Complex64,
    f1: Complex64,
    n: usize,
    opts: &TraceOptions,
) -> Result<GrowthReport> {
    if f0 == Complex64::new(0.0, 0.0) && f1 == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroFunction.at_stage("solve"));
    }
    if !(opts.r_max > 1.0) {
        return Err(
            Error::InvalidArgument(format!("r_max = {} must exceed 1", opts.r_max))
                .at_stage("rays"),
        );
    }
    let sol =
        solve_ode(&inst.a, &inst.b, f0, f1, n, opts.policy).map_err(|e| e.at_stage("solve"))?;
    let f = &sol.series;
    let max_residual = residuals(&series_of(&inst.a, n), &series_of(&inst.b, n), f)
        .into_iter()
        .fold(0.0, f64::max);
    let order = order_from_coeffs(f, DEFAULT_WINDOW).map_err(|e| e.at_stage("order"))?;
    let order_checkpoints: Vec<(usize, f64)> = [n / 4, n / 2, 3 * n / 4]
        .into_iter()
        .filter_map(|m| {
            let e = order_from_coeffs(&f.truncate(m), DEFAULT_WINDOW).ok()?;
            (!e.polynomial).then_some((m, e.order))
        })
        .collect();
    let radii = log_spaced(1.0, opts.r_max.max(2.0) * 4.0, 24);
    let modulus_order = order_from_modulus(f, &radii, opts.circle_samples);
    // a crossover between growth regimes can make a single earlier window
    // read high, so compare against the lowest checkpoint
    let lowest = order_checkpoints
        .iter()
        .map(|c| c.1)
        .fold(f64::INFINITY, f64::min);
    let diverging =
        !order.polynomial && lowest.is_finite() && order.order - lowest > DIVERGENCE_TOL;
    let observed = if order.order.is_infinite() || diverging {
        ObservedGrowth::Infinite
    } else {
        ObservedGrowth::Finite
    };

    let verdict = classify(inst, &opts.hypothesis).map_err(|e| e.at_stage("classify"))?;
    let consistency =
        if verdict.predicted == Prediction::AllInfinite && observed == ObservedGrowth::Finite {
            Consistency::Inconsistent
        } else {
            Consistency::Consistent
        };

    let dec = inst.effective_decomposition();
    let partition = dec.as_ref().and_then(|d| rays::partition(&d.p).ok());
    let angles: Vec<f64> = match &partition {
        Some(p) => p
            .interior_rays(opts.rays_per_sector)
            .into_iter()
            .map(|(_, t)| t)
            .collect(),
        None => (0..8)
            .map(|k| (k as f64 + 0.5) * std::f64::consts::FRAC_PI_4)
            .collect(),
    };
    let rho_hat = (order.order.is_finite() && !order.polynomial)
        .then_some(order.order)
        .or(order.polynomial.then_some(0.0));
    let rays: Vec<RayReport> = angles
        .par_iter()
        .map(|&theta| -> Result<RayReport> {
            let mut notes = Vec::new();
            let start = if f0 != Complex64::new(0.0, 0.0) {
                Some((0.0, f1 / f0, f0))
            } else {
                series_start(f, theta, 1.0).map(|(u, fv)| (1.0, u, fv))
            };
            let trace = match start {
                Some((r_start, u0, f_start)) => {
                    let ro = RiccatiOptions {
                        r_start,
                        f_start,
                        ..Default::default()
                    };
                    Some(
                        riccati_trace(&inst.a, &inst.b, theta, u0, opts.r_max, &ro)
                            .map_err(|e| e.at_stage("riccati"))?,
                    )
                }
                None => {
                    notes.push("no reliable starting value for f'/f".into());
                    None
                }
            };
            let limit = trace
                .as_ref()
                .map(|t| lemma2_limit(t, opts.decay_alpha))
                .transpose()
                .map_err(|e| e.at_stage("ray limit"))?;
            let membership = partition.as_ref().map(|p| p.membership(theta));
            let a_margin = match (&dec, &trace) {
                (Some(d), Some(t)) => {
                    let rs: Vec<f64> = t.radii.iter().copied().filter(|&r| r > 0.0).collect();
                    Some(
                        lemma3_margin(&inst.a, &d.p, theta, opts.lemma_eps, &rs)
                            .map_err(|e| e.at_stage("a margin"))?,
                    )
                }
                _ => None,
            };
            let log_derivative = match rho_hat {
                Some(rho) => Some(
                    lemma1_check(
                        f,
                        theta,
                        rho,
                        opts.lemma_eps,
                        &log_spaced(1.0, opts.r_max, 30),
                    )
                    .map_err(|e| e.at_stage("log derivative"))?,
                ),
                None => {
                    notes.push("order estimate not finite; derivative-ratio bound skipped".into());
                    None
                }
            };
            Ok(RayReport {
                theta,
                membership,
                trace,
                limit,
                a_margin,
                log_derivative,
                notes,
            })
        })
        .collect::<Result<_>>()?;

    let log_derivative_sweep = match (opts.sweep_phase, rho_hat) {
        (Some(phase), Some(rho)) => Some(
            lemma1_sweep(
                f,
                rho,
                opts.lemma_eps,
                &log_spaced(1.0, opts.r_max, 30),
                SWEEP_RAYS,
                phase,
                SWEEP_REQUIRED,
            )
            .map_err(|e| e.at_stage("log derivative"))?,
        ),
        _ => None,
    };

    Ok(GrowthReport {
        schema_version: SCHEMA_VERSION,
        instance: InstanceText {
            a: inst.a.render(),
            b: inst.b.render(),
            d: dec.as_ref().map(|d| d.d.render()),
            p: dec.as_ref().map(|d| render_poly(&d.p)),
        },
        verdict,
        order_comparison: theorem_a_check(inst),
        solution: SolutionSummary {
            f0,
            f1,
            truncation: n,
            arithmetic: sol.arithmetic,
            amplification_bits: sol.amplification_bits,
            max_residual,
            order,
            order_checkpoints,
            modulus_order,
            observed,
        },
        rays,
        log_derivative_sweep,
        consistency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::Rule;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn finite_order_example() {
        let inst = ProblemInstance::parse("e^{z}", "-(e^{z}+1)", None).unwrap();
        let rep = proof_trace(&inst, c(1.0), c(1.0), 1000, &TraceOptions::default()).unwrap();
        assert_eq!(rep.schema_version, 1);
        assert_eq!(rep.solution.observed, ObservedGrowth::Finite);
        assert!((rep.solution.order.order - 1.0).abs() < 0.02);
        assert_eq!(rep.consistency, Consistency::Consistent);
        assert_eq!(rep.rays.len(), 4);
        assert!(rep.log_derivative_sweep.is_none());
        // f = e^z: f'/f ≡ 1 on every ray
        for r in &rep.rays {
            let t = r.trace.as_ref().unwrap();
            assert!(
                t.values.iter().all(|u| (u - c(1.0)).norm() < 1e-8),
                "{}",
                r.theta
            );
        }
    }

    #[test]
    fn frei_infinite_is_consistent() {
        let inst = ProblemInstance::parse("e^{-z}", "-2", None).unwrap();
        let rep = proof_trace(&inst, c(1.0), c(0.0), 2000, &TraceOptions::default()).unwrap();
        assert_eq!(rep.verdict.rule_applied, Rule::FreiInfinite);
        assert_eq!(rep.solution.observed, ObservedGrowth::Infinite);
        assert_eq!(rep.consistency, Consistency::Consistent);
    }

    #[test]
    fn stage_tagged_errors() {
        let inst = ProblemInstance::parse("e^{z}", "1", None).unwrap();
        let e = proof_trace(&inst, c(0.0), c(0.0), 500, &TraceOptions::default()).unwrap_err();
        assert!(matches!(e, Error::Stage { stage: "solve", .. }));
        assert_eq!(e.root(), &Error::ZeroFunction);
        let e = proof_trace(&inst, c(1.0), c(0.0), 150, &TraceOptions::default()).unwrap_err();
        assert!(matches!(e, Error::Stage { stage: "order", .. }), "{e}");
    }
}
