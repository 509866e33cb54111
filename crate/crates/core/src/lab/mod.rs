//! Classification of `f'' + A f' + B f = 0` instances.
//!
//! * order comparison: `ρ(A) < ρ(B)` forces every nontrivial solution to
//!   have infinite order;
//! * the `n`/`m` trichotomy for `A = d e^{P}` (`ρ(d) < n`) and polynomial `B`;
//! * the `A = c e^{−z}`, constant `B` dichotomy;
//! * numerical evidence for the hypotheses on `d` when `ρ(d) > n`, and a
//!   search over candidate `d`.

mod trace;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{fractional_bits_complex, GaussInt};
use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::poly::ComplexPoly;
use crate::probe::{growth_exponent, GrowthClass, GrowthVerdict};
use crate::rays::{self, angle_distance, Membership, SectorPartition};

pub use trace::{
    proof_trace, Consistency, GrowthReport, ObservedGrowth, RayReport, TraceOptions, SCHEMA_VERSION,
};

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub d: ExpPoly,
    pub p: ComplexPoly,
}

#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub a: ExpPoly,
    pub b: ExpPoly,
    pub decomposition: Option<Decomposition>,
}

fn order_or_zero(e: &ExpPoly) -> usize {
    e.exact_order().unwrap_or(0)
}

impl ProblemInstance {
    /// Fails with [`Error::DecompositionMismatch`] unless `d·e^P` normalizes
    /// to `A`.
    pub fn new(a: ExpPoly, b: ExpPoly, decomposition: Option<Decomposition>) -> Result<Self> {
        if let Some(dec) = &decomposition {
            if dec.d.mul_exp(&dec.p) != a {
                return Err(Error::DecompositionMismatch);
            }
        }
        Ok(Self {
            a,
            b,
            decomposition,
        })
    }

    pub fn parse(a: &str, b: &str, decomposition: Option<(&str, &str)>) -> Result<Self> {
        let dec = decomposition
            .map(|(d, p)| -> Result<Decomposition> {
                Ok(Decomposition {
                    d: ExpPoly::parse(d)?,
                    p: crate::parse::parse_poly(p)?,
                })
            })
            .transpose()?;
        Self::new(ExpPoly::parse(a)?, ExpPoly::parse(b)?, dec)
    }

    pub fn order_a(&self) -> usize {
        order_or_zero(&self.a)
    }

    pub fn order_b(&self) -> usize {
        order_or_zero(&self.b)
    }

    /// The given decomposition, or `d = c z^k`, `P = Q` when `A` is a single
    /// term `c z^k e^{Q}` with non-constant `Q`.
    pub fn effective_decomposition(&self) -> Option<Decomposition> {
        if let Some(d) = &self.decomposition {
            return Some(d.clone());
        }
        match self.a.terms() {
            [t] if !t.exponent.is_constant() => {
                let p = t.exponent.without_constant();
                let d = ExpPoly::new(vec![crate::exppoly::Term::new(
                    t.coeff,
                    t.power,
                    ComplexPoly::constant(t.exponent.coeff(0)),
                )]);
                Some(Decomposition { d, p })
            }
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rule {
    #[serde(rename = "THEOREM_A_FORCED")]
    TheoremAForced,
    #[serde(rename = "THEOREM_B_CASE_1")]
    TheoremBCase1,
    #[serde(rename = "THEOREM_B_CASE_2")]
    TheoremBCase2,
    #[serde(rename = "THEOREM_B_CASE_3")]
    TheoremBCase3,
    #[serde(rename = "MAIN_THEOREM")]
    MainTheorem,
    #[serde(rename = "FREI_FINITE")]
    FreiFinite,
    #[serde(rename = "FREI_INFINITE")]
    FreiInfinite,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Prediction {
    AllInfinite,
    FinitePossible,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evidence {
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

impl Evidence {
    fn new(check: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub rule_applied: Rule,
    pub predicted: Prediction,
    pub evidence: Vec<Evidence>,
}

pub fn theorem_a_check(inst: &ProblemInstance) -> Verdict {
    let (ra, rb) = (inst.order_a(), inst.order_b());
    if ra < rb {
        Verdict {
            rule_applied: Rule::TheoremAForced,
            predicted: Prediction::AllInfinite,
            evidence: vec![Evidence::new(
                "order_comparison",
                true,
                format!("ρ(A) = {ra} < ρ(B) = {rb}"),
            )],
        }
    } else {
        Verdict {
            rule_applied: Rule::Inconclusive,
            predicted: Prediction::FinitePossible,
            evidence: vec![Evidence::new(
                "order_comparison",
                false,
                format!("ρ(B) = {rb} ≤ ρ(A) = {ra}: necessary condition for a finite-order solution holds"),
            )],
        }
    }
}

/// `z · 2^s` as a Gaussian integer with `s` just large enough.
fn dyadic(z: Complex64) -> GaussInt {
    GaussInt::from_complex(z, fractional_bits_complex(z))
}

/// Whether `a²/b` is a negative real, decided exactly on the given floats:
/// `a²/b = a² b̄ / |b|²`, so the sign pattern of `a² b̄` decides.
pub fn ratio_is_negative_real(a: Complex64, b: Complex64) -> bool {
    use num_traits::{Signed, Zero};
    let (ga, gb) = (dyadic(a), dyadic(b));
    let w = &(&ga * &ga) * &gb.conj();
    w.im.is_zero() && w.re.is_negative()
}

/// Trichotomy for `A = d e^{P}`, `deg P = n`, `ρ(d) < n`, and polynomial `B`
/// of degree `m ≥ 1`. The `ρ(d) < n` hypothesis is the caller's.
pub fn theorem_b_classify(n: usize, a_n: Complex64, m: usize, b_m: Complex64) -> Result<Verdict> {
    if m == 0 {
        return Err(Error::ConstantPolynomial);
    }
    if n == 0 {
        return Err(Error::InvalidArgument("deg P must be at least 1".into()));
    }
    if a_n == Complex64::new(0.0, 0.0) || b_m == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidArgument(
            "leading coefficients must be nonzero".into(),
        ));
    }
    let lhs = m + 2;
    let two_n = 2 * n;
    let all = |rule, check: &str, detail: String| Verdict {
        rule_applied: rule,
        predicted: Prediction::AllInfinite,
        evidence: vec![Evidence::new(check, true, detail)],
    };
    if lhs < two_n {
        return Ok(all(
            Rule::TheoremBCase1,
            "m+2<2n",
            format!("{lhs} < {two_n}"),
        ));
    }
    if lhs > two_n && lhs % two_n != 0 {
        return Ok(all(
            Rule::TheoremBCase2,
            "m+2>2n, m+2≠2kn",
            format!("{lhs} > {two_n} and {two_n} ∤ {lhs}"),
        ));
    }
    if lhs == two_n {
        if !ratio_is_negative_real(a_n, b_m) {
            return Ok(all(
                Rule::TheoremBCase3,
                "a_n²/b_m not a negative real",
                format!("m+2 = 2n = {two_n}"),
            ));
        }
        return Ok(Verdict {
            rule_applied: Rule::Inconclusive,
            predicted: Prediction::Inconclusive,
            evidence: vec![Evidence::new(
                "a_n²/b_m not a negative real",
                false,
                "m+2 = 2n and a_n²/b_m < 0",
            )],
        });
    }
    Ok(Verdict {
        rule_applied: Rule::Inconclusive,
        predicted: Prediction::Inconclusive,
        evidence: vec![Evidence::new(
            "m+2≠2kn",
            false,
            format!("m+2 = {lhs} = {}·{two_n} with m+2 ≠ 2n", lhs / two_n),
        )],
    })
}

/// `c e^{−z + q₀}` with constant `B`: finite-order solutions exist exactly
/// when `B = −k²` for an integer `k ≥ 0`.
pub fn frei_check(inst: &ProblemInstance) -> Option<Verdict> {
    let [t] = inst.a.terms() else { return None };
    let minus_z = ComplexPoly::from_real(&[0.0, -1.0]);
    if t.power != 0 || t.exponent.without_constant() != minus_z {
        return None;
    }
    let b = if inst.b.is_zero() {
        ComplexPoly::zero()
    } else {
        inst.b.as_polynomial()?
    };
    if !b.is_constant() {
        return None;
    }
    let beta = b.coeff(0);
    let k = (-beta.re).sqrt().round();
    let square = beta.im == 0.0 && beta.re <= 0.0 && -beta.re == k * k;
    Some(if square {
        Verdict {
            rule_applied: Rule::FreiFinite,
            predicted: Prediction::FinitePossible,
            evidence: vec![Evidence::new("B=-n²", true, format!("B = −{k}²"))],
        }
    } else {
        Verdict {
            rule_applied: Rule::FreiInfinite,
            predicted: Prediction::AllInfinite,
            evidence: vec![Evidence::new(
                "B=-n²",
                false,
                format!("B = {} is not −n²", crate::parse::render_complex(beta)),
            )],
        }
    })
}

/// Degree trichotomy on an instance: needs `A = d e^{P}` with `ρ(d) < n` and a
/// non-constant polynomial `B`. `None` when the rule does not apply.
pub fn theorem_b_instance(inst: &ProblemInstance) -> Option<Result<Verdict>> {
    let dec = inst.effective_decomposition()?;
    let n = dec.p.degree().finite()?;
    if n == 0 || order_or_zero(&dec.d) >= n {
        return None;
    }
    let b = inst.b.as_polynomial()?;
    let m = b.degree().finite()?;
    if m == 0 {
        return None;
    }
    Some(theorem_b_classify(
        n,
        dec.p.leading_coeff()?,
        m,
        b.leading_coeff()?,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Reading {
    /// `d` bounded away from zero and blowing up on both `E⁺` and `E⁻`.
    #[default]
    Conjunctive,
    /// Bounded away from zero on `E⁺`, blowing up on `E⁻`.
    Respective,
}

#[derive(Clone, Debug)]
pub struct HypothesisOptions {
    pub reading: Reading,
    pub rays_per_sector: usize,
    /// `inf |d|` over `[r_min, r_max]` must reach this.
    pub threshold: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub samples: usize,
}

impl Default for HypothesisOptions {
    fn default() -> Self {
        Self {
            reading: Reading::Conjunctive,
            rays_per_sector: 3,
            threshold: 1e-6,
            r_min: 10.0,
            r_max: 1000.0,
            samples: 60,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    /// Evenly spread over the sector interior.
    Interior,
    /// A direction where the dominant term of `d` changes.
    Stokes,
}

#[derive(Clone, Debug, Serialize)]
pub struct RayEvidence {
    pub theta: f64,
    pub sector: usize,
    pub membership: Membership,
    pub kind: ProbeKind,
    /// `ln inf |d|` over the sampled radii.
    pub min_log_abs_d: f64,
    pub bounded_away: bool,
    pub growth: GrowthVerdict,
    pub needs_bounded_away: bool,
    pub needs_blow_up: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub reading: Reading,
    pub n: usize,
    pub order_d: usize,
    pub preconditions: Vec<Evidence>,
    /// Sorted by angle.
    pub rays: Vec<RayEvidence>,
    pub pass: bool,
    /// An angle where `d` decays: a sampled ray if one decays, else the
    /// centre of a decay sector of one of its exponentials.
    pub decay_witness: Option<f64>,
}

/// Directions where two exponentials of `d` (or one exponential and the
/// constant level) exchange dominance.
fn stokes_directions(d: &ExpPoly) -> Vec<f64> {
    let mut exps: Vec<ComplexPoly> = d
        .terms()
        .iter()
        .map(|t| t.exponent.without_constant())
        .collect();
    exps.push(ComplexPoly::zero());
    let mut out = Vec::new();
    for i in 0..exps.len() {
        for j in i + 1..exps.len() {
            let diff = &exps[i] - &exps[j];
            if let Ok(angles) = rays::critical_rays(&diff) {
                out.extend(angles);
            }
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out.dedup_by(|a, b| angle_distance(*a, *b) < 1e-12);
    out
}

fn probe_ray(
    d: &ExpPoly,
    part: &SectorPartition,
    theta: f64,
    sector: usize,
    kind: ProbeKind,
    opts: &HypothesisOptions,
) -> Result<RayEvidence> {
    let membership = part.membership(theta);
    let n_samples = 200;
    let min_log = (0..n_samples)
        .map(|i| {
            let r = opts.r_min * (opts.r_max / opts.r_min).powf(i as f64 / (n_samples - 1) as f64);
            d.eval_polar(r, theta).magnitude_log()
        })
        .fold(f64::INFINITY, f64::min);
    let bounded_away = min_log >= opts.threshold.ln();
    let growth = growth_exponent(d, theta, opts.r_min, opts.r_max, opts.samples)?;
    let blows_up = growth.classification == GrowthClass::BlowsUp;
    let plus = membership == Membership::EPlusInterior;
    let (needs_bounded_away, needs_blow_up) = match opts.reading {
        Reading::Conjunctive => (true, true),
        Reading::Respective => (plus, !plus),
    };
    let pass = (!needs_bounded_away || bounded_away) && (!needs_blow_up || blows_up);
    Ok(RayEvidence {
        theta,
        sector,
        membership,
        kind,
        min_log_abs_d: min_log,
        bounded_away,
        growth,
        needs_bounded_away,
        needs_blow_up,
        pass,
    })
}

/// Numerical evidence for the hypotheses on `d`: `ρ(d) > n`, `B` polynomial,
/// and on sampled interior rays of every sector the bounded-away and
/// blow-up conditions required by `opts.reading`. Probes stay at least
/// `π/(8n)` away from the critical rays of `P`.
pub fn main_hypothesis_check(
    inst: &ProblemInstance,
    opts: &HypothesisOptions,
) -> Result<HypothesisReport> {
    let dec = inst
        .decomposition
        .as_ref()
        .ok_or(Error::MissingDecomposition)?;
    hypothesis_for(&dec.d, &dec.p, Some(&inst.b), opts)
}

fn hypothesis_for(
    d: &ExpPoly,
    p: &ComplexPoly,
    b: Option<&ExpPoly>,
    opts: &HypothesisOptions,
) -> Result<HypothesisReport> {
    if opts.rays_per_sector == 0 {
        return Err(Error::InvalidArgument(
            "rays_per_sector must be positive".into(),
        ));
    }
    let part = rays::partition(p)?;
    let n = part.n;
    let order_d = d.exact_order()?;
    let mut preconditions = vec![Evidence::new(
        "ρ(d)>n",
        order_d > n,
        format!("ρ(d) = {order_d}, n = {n}"),
    )];
    if let Some(b) = b {
        let poly = b.is_zero() || b.is_polynomial();
        preconditions.push(Evidence::new(
            "B polynomial",
            poly,
            if poly {
                "yes"
            } else {
                "B has exponential terms"
            },
        ));
    }
    let mut probes: Vec<(f64, usize, ProbeKind)> = part
        .interior_rays(opts.rays_per_sector)
        .into_iter()
        .map(|(s, t)| (t, s, ProbeKind::Interior))
        .collect();
    let margin = std::f64::consts::PI / (8.0 * n as f64);
    for t in stokes_directions(d) {
        let near_critical = part
            .critical_angles
            .iter()
            .any(|&c| angle_distance(c, t) < margin - 1e-12);
        let dup = probes.iter().any(|p| angle_distance(p.0, t) < 1e-12);
        if near_critical || dup {
            continue;
        }
        let sector = part
            .sectors
            .iter()
            .position(|s| s.contains(t))
            .expect("sectors cover the circle");
        probes.push((t, sector, ProbeKind::Stokes));
    }
    let mut rays: Vec<RayEvidence> = probes
        .par_iter()
        .map(|&(t, s, k)| probe_ray(d, &part, t, s, k, opts))
        .collect::<Result<_>>()?;
    rays.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    let complete = (0..part.sectors.len()).all(|s| {
        rays.iter()
            .filter(|r| r.sector == s && r.kind == ProbeKind::Interior)
            .count()
            >= opts.rays_per_sector
    });
    let pass = complete && preconditions.iter().all(|e| e.passed) && rays.iter().all(|r| r.pass);
    let decay_witness = match rays
        .iter()
        .find(|r| r.growth.classification == GrowthClass::Decays)
    {
        Some(r) => Some(r.theta),
        None => decay_direction(d, opts)?,
    };
    Ok(HypothesisReport {
        reading: opts.reading,
        n,
        order_d,
        preconditions,
        rays,
        pass,
        decay_witness,
    })
}

/// Centre of a decay sector of one of the exponentials of `d`, confirmed by
/// a growth fit; the smallest such angle.
fn decay_direction(d: &ExpPoly, opts: &HypothesisOptions) -> Result<Option<f64>> {
    let mut centres = Vec::new();
    for t in d.terms() {
        if let Ok(part) = rays::partition(&t.exponent) {
            centres.extend(
                part.sectors
                    .iter()
                    .filter(|s| s.sign < 0)
                    .map(|s| rays::normalize_angle(0.5 * (s.lo + s.hi))),
            );
        }
    }
    centres.sort_by(|a, b| a.total_cmp(b));
    for theta in centres {
        if growth_exponent(d, theta, opts.r_min, opts.r_max, opts.samples)?.classification
            == GrowthClass::Decays
        {
            return Ok(Some(theta));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessResult {
    pub candidate: String,
    pub pass: bool,
    /// Conditions that failed, with the first angle where each failed.
    pub failures: Vec<Evidence>,
    pub decay_witness: Option<f64>,
    pub report: HypothesisReport,
}

/// Scores every candidate `d` against the hypotheses for `P`.
pub fn witness_search(
    p: &ComplexPoly,
    candidates: &[ExpPoly],
    opts: &HypothesisOptions,
) -> Result<Vec<WitnessResult>> {
    if candidates.is_empty() {
        return Err(Error::EmptyGrid);
    }
    candidates
        .par_iter()
        .map(|d| {
            let report = hypothesis_for(d, p, None, opts)?;
            let mut failures: Vec<Evidence> = report
                .preconditions
                .iter()
                .filter(|e| !e.passed)
                .cloned()
                .collect();
            if let Some(r) = report
                .rays
                .iter()
                .find(|r| r.needs_bounded_away && !r.bounded_away)
            {
                failures.push(Evidence::new(
                    "bounded away from zero",
                    false,
                    format!("θ = {:.6}: ln inf|d| = {:.3}", r.theta, r.min_log_abs_d),
                ));
            }
            if let Some(r) = report
                .rays
                .iter()
                .find(|r| r.needs_blow_up && r.growth.classification != GrowthClass::BlowsUp)
            {
                failures.push(Evidence::new(
                    "blows up exponentially",
                    false,
                    format!("θ = {:.6}: {:?}", r.theta, r.growth.classification),
                ));
            }
            Ok(WitnessResult {
                candidate: d.render(),
                pass: report.pass,
                decay_witness: report.decay_witness,
                failures,
                report,
            })
        })
        .collect()
}

/// Combined classification: order comparison, the `e^{−z}` dichotomy, the
/// `n`/`m` trichotomy, then the hypothesis check for `ρ(d) > n`. When no
/// rule forces infinite order the prediction is the order comparison's.
pub fn classify(inst: &ProblemInstance, opts: &HypothesisOptions) -> Result<Verdict> {
    let a = theorem_a_check(inst);
    if a.predicted == Prediction::AllInfinite {
        return Ok(a);
    }
    if let Some(v) = frei_check(inst) {
        return Ok(v);
    }
    if let Some(v) = theorem_b_instance(inst) {
        let mut v = v?;
        if v.predicted == Prediction::AllInfinite {
            return Ok(v);
        }
        v.predicted = a.predicted;
        v.evidence.extend(a.evidence);
        return Ok(v);
    }
    let mut evidence = a.evidence;
    if let Some(dec) = inst.effective_decomposition() {
        let n = dec.p.degree().finite().unwrap_or(0);
        if n >= 1 && order_or_zero(&dec.d) > n {
            let with_dec = ProblemInstance {
                decomposition: Some(dec),
                ..inst.clone()
            };
            let h = main_hypothesis_check(&with_dec, opts)?;
            if h.pass {
                let mut ev = h.preconditions.clone();
                ev.push(Evidence::new(
                    "hypothesis rays",
                    true,
                    format!("{} rays passed", h.rays.len()),
                ));
                return Ok(Verdict {
                    rule_applied: Rule::MainTheorem,
                    predicted: Prediction::AllInfinite,
                    evidence: ev,
                });
            }
            evidence.extend(h.preconditions.into_iter().filter(|e| !e.passed));
            let failed = h.rays.iter().filter(|r| !r.pass).count();
            evidence.push(Evidence::new(
                "hypothesis rays",
                false,
                format!("{failed} of {} rays failed", h.rays.len()),
            ));
        }
    }
    Ok(Verdict {
        rule_applied: Rule::Inconclusive,
        predicted: a.predicted,
        evidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn inst(a: &str, b: &str) -> ProblemInstance {
        ProblemInstance::parse(a, b, None).unwrap()
    }

    #[test]
    fn theorem_a_examples() {
        assert_eq!(
            theorem_a_check(&inst("e^{z}", "-(e^{z}+1)")).predicted,
            Prediction::FinitePossible
        );
        assert_eq!(
            theorem_a_check(&inst("e^{z}", "-1")).predicted,
            Prediction::FinitePossible
        );
        let v = theorem_a_check(&inst("e^{z}", "e^{z^2}"));
        assert_eq!(
            (v.rule_applied, v.predicted),
            (Rule::TheoremAForced, Prediction::AllInfinite)
        );
    }

    #[test]
    fn theorem_b_examples() {
        let one = c(1.0, 0.0);
        assert_eq!(
            theorem_b_classify(1, one, 1, one).unwrap().rule_applied,
            Rule::TheoremBCase2
        );
        assert_eq!(
            theorem_b_classify(2, one, 1, one).unwrap().rule_applied,
            Rule::TheoremBCase1
        );
        let v = theorem_b_classify(1, one, 2, c(-1.0, 0.0)).unwrap();
        assert_eq!(
            (v.rule_applied, v.predicted),
            (Rule::Inconclusive, Prediction::Inconclusive)
        );
        assert!(matches!(
            theorem_b_classify(1, one, 0, one),
            Err(Error::ConstantPolynomial)
        ));
        // case 3: n = 2, m = 2
        assert_eq!(
            theorem_b_classify(2, one, 2, one).unwrap().rule_applied,
            Rule::TheoremBCase3
        );
        assert_eq!(
            theorem_b_classify(2, c(0.0, 1.0), 2, one)
                .unwrap()
                .rule_applied,
            Rule::Inconclusive
        );
        assert_eq!(
            theorem_b_classify(2, c(0.0, 1.0), 2, c(0.0, 1.0))
                .unwrap()
                .rule_applied,
            Rule::TheoremBCase3
        );
    }

    #[test]
    fn negative_real_test_is_exact() {
        assert!(ratio_is_negative_real(c(1.0, 0.0), c(-1.0, 0.0)));
        assert!(ratio_is_negative_real(c(1.0, 1.0), c(0.0, -0.5)));
        // decided on the stored doubles, not on the decimal text
        assert!(!ratio_is_negative_real(c(0.1, 0.0), c(0.01, 0.0)));
        assert!(!ratio_is_negative_real(c(1.0, 1e-300), c(-1.0, 0.0)));
    }

    proptest::proptest! {
        #[test]
        fn negativity_is_scale_invariant(ar in -4.0f64..4.0, ai in -4.0f64..4.0, br in -4.0f64..4.0, bi in -4.0f64..4.0, t in 0.01f64..100.0) {
            proptest::prop_assume!(br != 0.0 || bi != 0.0);
            let a = c(ar, ai);
            let b = c(br, bi);
            proptest::prop_assert_eq!(ratio_is_negative_real(a, b), ratio_is_negative_real(a, b * t));
            // the predicate is also invariant on exactly-real negatives
            proptest::prop_assert!(ratio_is_negative_real(c(ar.abs() + 0.5, 0.0), c(-t, 0.0)));
        }
    }

    #[test]
    fn frei_rule() {
        let v = frei_check(&inst("e^{-z}", "-1")).unwrap();
        assert_eq!(v.rule_applied, Rule::FreiFinite);
        assert_eq!(
            frei_check(&inst("e^{-z}", "-4")).unwrap().rule_applied,
            Rule::FreiFinite
        );
        assert_eq!(
            frei_check(&inst("e^{-z}", "-2")).unwrap().rule_applied,
            Rule::FreiInfinite
        );
        assert_eq!(
            frei_check(&inst("3*e^{-z+1}", "-2")).unwrap().predicted,
            Prediction::AllInfinite
        );
        assert_eq!(
            frei_check(&inst("e^{-z}", "0")).unwrap().rule_applied,
            Rule::FreiFinite
        );
        assert!(frei_check(&inst("e^{z}", "-2")).is_none());
        assert!(frei_check(&inst("e^{-z}", "z")).is_none());
    }

    #[test]
    fn decomposition_must_match() {
        assert!(ProblemInstance::parse("e^{z^2}*e^{z}", "1", Some(("e^{z^2}", "z"))).is_ok());
        assert!(matches!(
            ProblemInstance::parse("e^{z^2}", "1", Some(("e^{z^2}", "z"))),
            Err(Error::DecompositionMismatch)
        ));
        let d = inst("2*z*e^{z+3}", "1").effective_decomposition().unwrap();
        assert_eq!(d.p, ComplexPoly::z());
        assert_eq!(d.d.exact_order().unwrap(), 0);
    }

    #[test]
    fn classify_examples() {
        let o = HypothesisOptions::default();
        assert_eq!(
            classify(&inst("e^{z}", "e^{z^2}"), &o)
                .unwrap()
                .rule_applied,
            Rule::TheoremAForced
        );
        assert_eq!(
            classify(&inst("e^{z}", "z+1"), &o).unwrap().rule_applied,
            Rule::TheoremBCase2
        );
        assert_eq!(
            classify(&inst("e^{z}", "z^2"), &o).unwrap().rule_applied,
            Rule::Inconclusive
        );
        assert_eq!(
            classify(&inst("e^{-z}", "-2"), &o).unwrap().rule_applied,
            Rule::FreiInfinite
        );
        assert_eq!(
            classify(&inst("e^{z}", "-(e^{z}+1)"), &o)
                .unwrap()
                .predicted,
            Prediction::FinitePossible
        );
    }

    #[test]
    fn hypothesis_examples() {
        let o = HypothesisOptions::default();
        let i = ProblemInstance::parse("e^{z^2}*e^{z}", "1", Some(("e^{z^2}", "z"))).unwrap();
        let h = main_hypothesis_check(&i, &o).unwrap();
        assert!(!h.pass);
        assert!(h.preconditions.iter().all(|e| e.passed));
        assert!(h
            .rays
            .iter()
            .any(|r| r.growth.classification == GrowthClass::Decays
                && r.membership == Membership::EPlusInterior));
        assert!(h
            .rays
            .iter()
            .any(|r| r.growth.classification == GrowthClass::Decays
                && r.membership == Membership::EMinusInterior));
        let i = ProblemInstance::parse("e^{z}", "1", Some(("1", "z"))).unwrap();
        let h = main_hypothesis_check(&i, &o).unwrap();
        assert!(!h.pass && !h.preconditions[0].passed);
        let i = ProblemInstance::parse("e^{z^2}*e^{z^3}", "1", Some(("e^{z^2}", "z^3"))).unwrap();
        assert!(!main_hypothesis_check(&i, &o).unwrap().preconditions[0].passed);
        assert!(matches!(
            main_hypothesis_check(&inst("e^{z}", "1"), &o),
            Err(Error::MissingDecomposition)
        ));
    }

    #[test]
    fn evidence_is_sorted_and_complete() {
        let o = HypothesisOptions {
            rays_per_sector: 4,
            reading: Reading::Respective,
            ..Default::default()
        };
        let i = ProblemInstance::parse(
            "(e^{z^3}+e^{-z^3})*e^{z}",
            "1",
            Some(("e^{z^3}+e^{-z^3}", "z")),
        )
        .unwrap();
        let h = main_hypothesis_check(&i, &o).unwrap();
        assert!(h.rays.windows(2).all(|w| w[0].theta < w[1].theta));
        for s in 0..2 {
            assert!(
                h.rays
                    .iter()
                    .filter(|r| r.sector == s && r.kind == ProbeKind::Interior)
                    .count()
                    >= 4
            );
        }
        assert!(h.rays.iter().any(|r| r.kind == ProbeKind::Stokes));
        for r in &h.rays {
            assert_eq!(
                r.needs_bounded_away,
                r.membership == Membership::EPlusInterior
            );
            assert!(r.needs_blow_up != r.needs_bounded_away);
        }
    }

    #[test]
    fn witness_examples() {
        let o = HypothesisOptions::default();
        let p = ComplexPoly::z();
        let grid: Vec<ExpPoly> = ["e^{z^2}", "e^{i*z^2}", "e^{-z^2}", "e^{-i*z^2}"]
            .iter()
            .map(|s| ExpPoly::parse(s).unwrap())
            .collect();
        let res = witness_search(&p, &grid, &o).unwrap();
        assert_eq!(res.len(), 4);
        for (w, coef) in res
            .iter()
            .zip([c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)])
        {
            assert!(!w.pass);
            let t = w.decay_witness.expect("decay witness");
            assert!((coef * Complex64::from_polar(1.0, 2.0 * t)).re < 0.0);
        }
        let both = witness_search(&p, &[ExpPoly::parse("e^{z^2}+e^{-z^2}").unwrap()], &o).unwrap();
        assert!(!both[0].pass);
        let bad: Vec<f64> = both[0]
            .report
            .rays
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.theta)
            .collect();
        for t in [PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, 7.0 * PI / 4.0] {
            assert!(bad.iter().any(|b| angle_distance(*b, t) < 1e-9), "{t}");
        }
        assert!(matches!(witness_search(&p, &[], &o), Err(Error::EmptyGrid)));
    }
}
