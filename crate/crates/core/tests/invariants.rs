//! Randomised checks over generated instances. Seeds are fixed so failures
//! reproduce.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgl_core::lab::{self, ObservedGrowth, Prediction, ProblemInstance, Rule, TraceOptions};
use sgl_core::probe::{growth_exponent, lemma3_margin, GrowthClass};
use sgl_core::rays;
use sgl_core::series::{solve_ode, ArithmeticPolicy};
use sgl_core::{ComplexPoly, ExpPoly, Term};

fn unit(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))
}

fn coeff(rng: &mut impl Rng, lo: f64, hi: f64) -> Complex64 {
    unit(rng) * rng.random_range(lo..hi)
}

/// Polynomial of exact degree `deg` with leading modulus in `lead` and
/// lower coefficients of modulus below `small`.
fn poly(rng: &mut impl Rng, deg: usize, lead: (f64, f64), small: f64) -> ComplexPoly {
    let mut c: Vec<Complex64> = (0..deg).map(|_| coeff(rng, 0.0, small)).collect();
    c.push(coeff(rng, lead.0, lead.1));
    ComplexPoly::new(c)
}

#[test]
fn growth_exponent_matches_order_where_leading_term_dominates() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..50 {
        let n = rng.random_range(1..=3usize);
        let lead = poly(&mut rng, n, (1.0, 2.0), 0.3);
        let mut terms = vec![Term::new(
            coeff(&mut rng, 0.5, 2.0),
            rng.random_range(0..=2),
            lead.clone(),
        )];
        if n > 1 {
            let k = rng.random_range(1..n);
            terms.push(Term::new(
                coeff(&mut rng, 0.5, 2.0),
                0,
                poly(&mut rng, k, (0.5, 1.0), 0.3),
            ));
        }
        let g = ExpPoly::new(terms);
        assert_eq!(g.exact_order().unwrap(), n);
        let part =
            rays::partition(&ComplexPoly::monomial(lead.leading_coeff().unwrap(), n)).unwrap();
        for (s, sector) in part.sectors.iter().enumerate() {
            let mut best = f64::INFINITY;
            // a z^k prefactor biases the slope by about ln r / r, so sample far out
            for theta in sector.interior_rays(4, PI / (8.0 * n as f64)) {
                let v = growth_exponent(&g, theta, 1e3, 1e6, 60).unwrap();
                if v.exponent.is_finite() {
                    assert!(
                        v.exponent <= n as f64 + 0.05,
                        "case {case} {} θ={theta}: {}",
                        g.render(),
                        v.exponent
                    );
                    best = best.min((v.exponent - n as f64).abs());
                }
            }
            if sector.sign > 0 {
                assert!(
                    best <= 0.05,
                    "case {case} {} sector {s}: closest exponent off by {best}",
                    g.render()
                );
            }
        }
    }
}

#[test]
fn lemma3_margin_passes_where_the_dominant_part_blows_up() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let radii: Vec<f64> = (0..40).map(|i| 10f64.powf(2.0 * i as f64 / 39.0)).collect();
    let mut checked = 0;
    for case in 0..20 {
        let n = rng.random_range(1..=2usize);
        let s = n + rng.random_range(1..=2usize);
        let p = poly(&mut rng, n, (0.5, 2.0), 1.0);
        let d = ExpPoly::exp_of(ComplexPoly::monomial(coeff(&mut rng, 0.5, 2.0), s));
        let a = d.mul_exp(&p);
        let part = rays::partition(&p).unwrap();
        let mut screened = 0;
        for (_, theta) in part.interior_rays(3) {
            if growth_exponent(&d, theta, 1.0, 100.0, 40)
                .unwrap()
                .classification
                != GrowthClass::BlowsUp
            {
                continue;
            }
            screened += 1;
            let rep = lemma3_margin(&a, &p, theta, 0.5, &radii).unwrap();
            assert!(
                rep.pass,
                "case {case}: A = {} θ = {theta} margins {:?}",
                a.render(),
                rep.margins
            );
        }
        assert!(screened > 0, "case {case}: no ray where d blows up");
        checked += screened;
    }
    assert!(checked >= 40);
}

#[test]
fn solutions_are_linear_in_initial_conditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..8 {
        let a = ExpPoly::exp_of({
            let deg = rng.random_range(0..=2);
            poly(&mut rng, deg, (0.2, 1.0), 0.5)
        })
        .scale(coeff(&mut rng, 0.5, 2.0));
        let b = ExpPoly::exp_of({
            let deg = rng.random_range(1..=2);
            poly(&mut rng, deg, (0.2, 1.0), 0.5)
        })
        .scale(coeff(&mut rng, 0.5, 2.0));
        let (f0, f1) = (coeff(&mut rng, 0.5, 2.0), coeff(&mut rng, 0.5, 2.0));
        let n = 300;
        let solve = |x, y| {
            solve_ode(&a, &b, x, y, n, ArithmeticPolicy::Auto)
                .unwrap()
                .series
        };
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let (g, u, v) = (solve(f0, f1), solve(one, zero), solve(zero, one));
        for k in 0..=n {
            let (pu, pv) = (u.coeff(k).mul_complex(f0), v.coeff(k).mul_complex(f1));
            let scale = pu.abs() + pv.abs();
            if scale.is_zero() {
                assert!(g.coeff(k).is_zero());
                continue;
            }
            let err = (g.coeff(k) - (pu + pv)).magnitude_log() - scale.magnitude_log();
            assert!(
                err < (1e-8f64).ln(),
                "case {case} k={k}: relative error e^{err}"
            );
        }
    }
}

/// Order-forced instances: `ρ(B) > ρ(A)`, so every nonzero solution has
/// infinite order and the trace must see the estimates drift upward.
#[test]
fn forced_instances_show_divergent_order_estimates() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let opts = TraceOptions {
        r_max: 20.0,
        rays_per_sector: 1,
        ..Default::default()
    };
    for case in 0..10 {
        let s = rng.random_range(0..=1usize);
        let a = if s == 0 {
            ExpPoly::from_poly(&{
                let deg = rng.random_range(0..=2);
                poly(&mut rng, deg, (0.5, 2.0), 1.0)
            })
        } else {
            ExpPoly::exp_of(poly(&mut rng, 1, (0.5, 2.0), 1.0))
        };
        let b = ExpPoly::exp_of(poly(&mut rng, s + 1, (0.5, 2.0), 1.0))
            .scale(coeff(&mut rng, 0.5, 2.0));
        let inst = ProblemInstance::new(a, b, None).unwrap();
        assert!(inst.order_b() > inst.order_a());
        let (f0, f1) = (coeff(&mut rng, 0.5, 2.0), coeff(&mut rng, 0.5, 2.0));
        let rep = lab::proof_trace(&inst, f0, f1, 1000, &opts).unwrap();
        assert_eq!(rep.verdict.rule_applied, Rule::TheoremAForced);
        assert_eq!(rep.verdict.predicted, Prediction::AllInfinite);
        assert_eq!(
            rep.solution.observed,
            ObservedGrowth::Infinite,
            "case {case}: A = {} B = {} order {} checkpoints {:?}",
            inst.a.render(),
            inst.b.render(),
            rep.solution.order.order,
            rep.solution.order_checkpoints
        );
        assert_eq!(rep.consistency, lab::Consistency::Consistent);
    }
}
