//! Order of growth from Taylor coefficients.
//!
//! For an entire function of order `ρ`, `−ln|c_k| ≈ (1/ρ) k ln k + b k + O(ln k)`
//! along the upper envelope of the coefficients. The estimator fits that
//! model to the upper concave hull of `(k, ln|c_k|)` over a tail window and
//! returns `1/a`. The classical `sup (k ln k)/(−ln|c_k|)` converges to `ρ`
//! only logarithmically, so it is reported as a diagnostic instead.

use serde::Serialize;

use super::PowerSeries;
use crate::error::{Error, Result};

/// Fraction of the indices (the upper part) used by default.
pub const DEFAULT_WINDOW: f64 = 0.5;
/// Minimum number of nonzero coefficients inside the window.
pub const MIN_TAIL_COEFFS: usize = 100;

#[derive(Clone, Debug, Serialize)]
pub struct OrderEstimate {
    /// `f64::INFINITY` when the envelope shows no `k ln k` decay.
    pub order: f64,
    pub polynomial: bool,
    /// Fitted `a` in `−ln|c_k| ≈ a k ln k + b k + const`.
    pub slope: f64,
    pub window: (usize, usize),
    pub hull_points: usize,
    /// Classical `sup_k (k ln k)/(−ln|c_k|)` over the window.
    pub classic_sup: f64,
    /// `(k, (k ln k)/(−ln|c_k|))` for every nonzero coefficient in the window.
    pub classic_sequence: Vec<(usize, f64)>,
}

/// Upper concave hull of points sorted by `x`.
fn upper_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in points {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Least squares for `y ≈ p0·u + p1·v + p2`, solved on centered columns.
fn fit3(rows: &[(f64, f64, f64)]) -> Option<(f64, f64)> {
    let n = rows.len() as f64;
    let (mu, mv, my) = rows.iter().fold((0.0, 0.0, 0.0), |acc, r| {
        (acc.0 + r.0, acc.1 + r.1, acc.2 + r.2)
    });
    let (mu, mv, my) = (mu / n, mv / n, my / n);
    let (mut suu, mut suv, mut svv, mut suy, mut svy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(u, v, y) in rows {
        let (u, v, y) = (u - mu, v - mv, y - my);
        suu += u * u;
        suv += u * v;
        svv += v * v;
        suy += u * y;
        svy += v * y;
    }
    let det = suu * svv - suv * suv;
    if !(det.abs() > 1e-14 * suu * svv) {
        return None;
    }
    Some(((suy * svv - svy * suv) / det, (svy * suu - suy * suv) / det))
}

fn estimate_range(f: &PowerSeries, lo: usize, hi: usize) -> Result<OrderEstimate> {
    let pts: Vec<(usize, f64)> = (lo..=hi)
        .filter_map(|k| {
            let c = f.coeff(k);
            (!c.is_zero()).then(|| (k, c.magnitude_log()))
        })
        .collect();
    let classic_sequence: Vec<(usize, f64)> = pts
        .iter()
        .filter(|&&(k, _)| k >= 2)
        .map(|&(k, l)| {
            let kf = k as f64;
            (
                k,
                if l < 0.0 {
                    kf * kf.ln() / -l
                } else {
                    f64::INFINITY
                },
            )
        })
        .collect();
    let classic_sup = classic_sequence
        .iter()
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut est = OrderEstimate {
        order: 0.0,
        polynomial: false,
        slope: f64::NAN,
        window: (lo, hi),
        hull_points: 0,
        classic_sup,
        classic_sequence,
    };
    if pts.is_empty() {
        est.polynomial = true;
        est.classic_sup = 0.0;
        return Ok(est);
    }
    if pts.len() < MIN_TAIL_COEFFS {
        return Err(Error::TruncationInsufficient(format!(
            "{} nonzero coefficients in [{lo}, {hi}], need {MIN_TAIL_COEFFS}",
            pts.len()
        )));
    }
    let scale = hi as f64;
    let xy: Vec<(f64, f64)> = pts.iter().map(|&(k, l)| (k as f64, l)).collect();
    let mut hull = upper_hull(&xy);
    if hull.len() < 3 {
        hull = xy;
    }
    est.hull_points = hull.len();
    // −ln|c_k| = a k ln k + b k + c; with x = k/hi, k ln k = hi(x ln x) + (hi ln hi) x.
    let rows: Vec<(f64, f64, f64)> = hull
        .iter()
        .map(|&(k, l)| {
            let x = k / scale;
            (x * x.ln(), x, -l / scale)
        })
        .collect();
    let a = fit3(&rows).map(|p| p.0).unwrap_or(f64::NAN);
    est.slope = a;
    est.order = if a.is_finite() && a > 1e-9 {
        1.0 / a
    } else {
        f64::INFINITY
    };
    Ok(est)
}

/// Order estimate from the last `window` fraction of the coefficients.
pub fn order_from_coeffs(f: &PowerSeries, window: f64) -> Result<OrderEstimate> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "window fraction {window} not in (0, 1]"
        )));
    }
    let n = f.order();
    let lo = ((n as f64) * (1.0 - window)).floor() as usize;
    estimate_range(f, lo, n)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunningOrder {
    Estimate(f64),
    /// No nonzero coefficient in the window.
    Polynomial,
    /// Too few nonzero coefficients in the window.
    Insufficient,
}

/// Running estimates `ρ_k` using the window `[k/2, k]`, for each `k` in `ks`.
pub fn running_order(f: &PowerSeries, ks: &[usize]) -> Vec<(usize, RunningOrder)> {
    ks.iter()
        .map(|&k| {
            let k = k.min(f.order());
            let v = match estimate_range(f, k / 2, k) {
                Ok(e) if e.polynomial => RunningOrder::Polynomial,
                Ok(e) => RunningOrder::Estimate(e.order),
                Err(_) => RunningOrder::Insufficient,
            };
            (k, v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaled::ScaledComplex;

    fn from_logs(logs: impl Iterator<Item = f64>) -> PowerSeries {
        PowerSeries::new(
            logs.map(|l| ScaledComplex::from_log_polar(l, 0.0))
                .collect(),
        )
    }

    fn ln_gamma(x: f64) -> f64 {
        // Stirling series, shifted for accuracy at small x
        let mut x = x;
        let mut acc = 0.0;
        while x < 10.0 {
            acc -= x.ln();
            x += 1.0;
        }
        acc + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3))
    }

    #[test]
    fn reciprocal_factorials_give_order_one() {
        let f = from_logs((0..=2000).map(|k| -ln_gamma(k as f64 + 1.0)));
        let e = order_from_coeffs(&f, DEFAULT_WINDOW).unwrap();
        assert!((e.order - 1.0).abs() <= 0.02, "{}", e.order);
        // the literal sup is far off at this N, which is why it is only a diagnostic
        assert!(e.classic_sup > 1.1);
    }

    #[test]
    fn half_gamma_pattern_gives_order_two() {
        let f = from_logs((0..=2000).map(|k| -ln_gamma(k as f64 / 2.0 + 1.0)));
        let e = order_from_coeffs(&f, DEFAULT_WINDOW).unwrap();
        assert!((e.order - 2.0).abs() <= 0.05, "{}", e.order);
    }

    #[test]
    fn polynomial_flag() {
        let mut c = vec![ScaledComplex::ZERO; 300];
        c[0] = ScaledComplex::from_real(1.0);
        c[3] = ScaledComplex::from_real(2.0);
        let e = order_from_coeffs(&PowerSeries::new(c), DEFAULT_WINDOW).unwrap();
        assert!(e.polynomial);
        assert_eq!(e.order, 0.0);
    }

    #[test]
    fn sparse_tail_is_rejected() {
        let mut c = vec![ScaledComplex::ZERO; 300];
        c[250] = ScaledComplex::from_real(1e-300);
        assert!(matches!(
            order_from_coeffs(&PowerSeries::new(c), DEFAULT_WINDOW),
            Err(Error::TruncationInsufficient(_))
        ));
    }

    #[test]
    fn growing_coefficients_mean_infinite_order() {
        let f = from_logs((0..=400).map(|k| k as f64 * 0.01));
        assert_eq!(
            order_from_coeffs(&f, DEFAULT_WINDOW).unwrap().order,
            f64::INFINITY
        );
    }

    #[test]
    fn upper_hull_ignores_dips() {
        let pts = [(0.0, 0.0), (1.0, -5.0), (2.0, -1.0), (3.0, -3.0)];
        assert_eq!(upper_hull(&pts), vec![(0.0, 0.0), (2.0, -1.0), (3.0, -3.0)]);
    }

    #[test]
    fn running_order_flags_short_windows() {
        let f = from_logs((0..=1000).map(|k| -ln_gamma(k as f64 + 1.0)));
        let r = running_order(&f, &[100, 1000]);
        assert_eq!(r[0].1, RunningOrder::Insufficient);
        let RunningOrder::Estimate(rho) = r[1].1 else {
            panic!("{:?}", r[1])
        };
        assert!((rho - 1.0).abs() < 0.05);
        let mut poly = vec![ScaledComplex::ZERO; 501];
        poly[1] = ScaledComplex::ONE;
        assert_eq!(
            running_order(&PowerSeries::new(poly), &[500])[0].1,
            RunningOrder::Polynomial
        );
    }

    proptest::proptest! {
        #[test]
        fn scale_invariance(shift in -300.0f64..300.0, phase in -3.0f64..3.0) {
            let base: Vec<f64> = (0..=600).map(|k| -ln_gamma(k as f64 / 1.5 + 1.0)).collect();
            let f = from_logs(base.iter().copied());
            let g = PowerSeries::new(base.iter().map(|&l| ScaledComplex::from_log_polar(l + shift, phase)).collect());
            let a = order_from_coeffs(&f, DEFAULT_WINDOW).unwrap().order;
            let b = order_from_coeffs(&g, DEFAULT_WINDOW).unwrap().order;
            proptest::prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }
}
