//! Riccati traces against `f'/f` summed from the Taylor series.

use num_complex::Complex64;
use sgl_core::probe::{riccati_trace, RiccatiOptions};
use sgl_core::series::eval_at;
use sgl_core::series::{solve_ode, ArithmeticPolicy};
use sgl_core::ExpPoly;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn riccati_agrees_with_series_where_both_are_valid() {
    let fixtures = [
        ("e^{z}", "-(e^{z}+1)", c(1.0, 0.0), c(1.0, 0.0)),
        ("e^{z}", "-(e^{z}+1)", c(2.0, 0.0), c(1.0, 0.0)),
        ("e^{-z}", "-1", c(2.0, 0.0), c(1.0, 0.0)),
        ("e^{-z}", "-2", c(1.0, 0.0), c(0.5, 0.0)),
        ("0", "-1", c(1.0, 0.0), c(0.3, 0.2)),
        ("z", "1", c(1.0, 0.0), c(-0.5, 0.0)),
        ("1", "e^{i*z}", c(1.0, 0.0), c(0.0, 1.0)),
    ];
    let mut compared = 0;
    for (a, b, f0, f1) in fixtures {
        let (pa, pb) = (ExpPoly::parse(a).unwrap(), ExpPoly::parse(b).unwrap());
        let f = solve_ode(&pa, &pb, f0, f1, 1500, ArithmeticPolicy::Auto)
            .unwrap()
            .series;
        let df = f.derivative();
        for theta in [0.0, 1.0, 2.5, 4.0] {
            let opts = RiccatiOptions {
                f_start: f0,
                checkpoints: 60,
                ..Default::default()
            };
            let tr = riccati_trace(&pa, &pb, theta, f1 / f0, 30.0, &opts).unwrap();
            let mut worst: f64 = 0.0;
            for (&r, &u) in tr.radii.iter().zip(&tr.values) {
                let z = Complex64::from_polar(r, theta);
                let (fv, dv) = (eval_at(&f, z), eval_at(&df, z));
                let rel = |v: &sgl_core::series::PointValue| {
                    v.error_bound_log() - v.value.magnitude_log()
                };
                // series path valid: tail converged and summation error below 1e-10 of the value
                if !(fv.tail_ok()
                    && dv.tail_ok()
                    && rel(&fv) < (1e-10f64).ln()
                    && rel(&dv) < (1e-10f64).ln())
                {
                    continue;
                }
                let want = (dv.value / fv.value).to_complex();
                worst = worst.max((u - want).norm() / want.norm().max(1e-300));
                compared += 1;
            }
            assert!(
                worst <= 1e-6,
                "A={a} B={b} θ={theta}: relative disagreement {worst:e}"
            );
        }
    }
    assert!(compared > 500, "{compared}");
}
