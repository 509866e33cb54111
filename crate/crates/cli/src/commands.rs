use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use sgl_core::lab::{
    self, GrowthReport, HypothesisOptions, HypothesisReport, TraceOptions, Verdict, WitnessResult,
};
use sgl_core::parse::render_poly;
use sgl_core::rays::{self, SectorPartition};
use sgl_core::series::{
    order_from_coeffs, order_from_modulus, residuals, running_order, series_of, solve_ode,
    Arithmetic, ArithmeticPolicy, ModulusOrder, OrderEstimate, RunningOrder, DEFAULT_WINDOW,
};
use sgl_core::{ComplexPoly, ExpPoly};

use crate::output::{sci, to_csv, to_json};
use crate::spec::{self, Loaded};
use crate::CliError;

/// Named outputs of one command. The first of each format is the primary
/// one, printed to stdout when no output directory is given.
pub struct Artifacts {
    pub json: Vec<(String, String)>,
    pub csv: Vec<(String, String)>,
}

fn core(context: &str) -> impl Fn(sgl_core::Error) -> CliError + '_ {
    move |error| CliError::Core {
        context: context.to_string(),
        error,
    }
}

#[derive(Serialize)]
struct RaysDoc {
    p: String,
    partition: SectorPartition,
}

pub fn rays(loaded: &Loaded) -> Result<Artifacts, CliError> {
    let p = spec::sector_poly(loaded)?;
    let partition = rays::partition(&p).map_err(core("P"))?;
    let rows: Vec<Vec<String>> = partition
        .sectors
        .iter()
        .map(|s| vec![sci(s.lo), s.sign.to_string()])
        .collect();
    Ok(Artifacts {
        json: vec![(
            "rays.json".into(),
            to_json(&RaysDoc {
                p: render_poly(&p),
                partition,
            })?,
        )],
        csv: vec![("rays.csv".into(), to_csv(&["angle", "sign"], &rows)?)],
    })
}

#[derive(Serialize)]
struct SolveEntry {
    f0: Complex64,
    f1: Complex64,
    arithmetic: Arithmetic,
    amplification_bits: f64,
    first_unstable_index: Option<usize>,
    max_residual: f64,
    order: OrderEstimate,
    modulus_order: ModulusOrder,
}

#[derive(Serialize)]
struct SolveDoc {
    a: String,
    b: String,
    truncation: usize,
    solutions: Vec<SolveEntry>,
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

pub fn solve(loaded: &Loaded) -> Result<Artifacts, CliError> {
    let inst = &loaded.instance;
    let n = loaded.file.truncation;
    let (sa, sb) = (series_of(&inst.a, n), series_of(&inst.b, n));
    let ks: Vec<usize> = (0..=n).collect();
    let results: Vec<(SolveEntry, Vec<Vec<String>>)> = loaded
        .ics
        .par_iter()
        .enumerate()
        .map(|(ic, &(f0, f1))| -> Result<_, CliError> {
            let ctx = format!("initial condition {ic}");
            let sol = solve_ode(&inst.a, &inst.b, f0, f1, n, ArithmeticPolicy::Auto)
                .map_err(core(&ctx))?;
            let f = &sol.series;
            let order = order_from_coeffs(f, DEFAULT_WINDOW).map_err(core(&ctx))?;
            let modulus_order =
                order_from_modulus(f, &log_spaced(1.0, 4.0 * loaded.file.r_max, 24), 64);
            let max_residual = residuals(&sa, &sb, f).into_iter().fold(0.0, f64::max);
            let rows = running_order(f, &ks)
                .into_iter()
                .map(|(k, r)| {
                    let (rho, flag) = match r {
                        RunningOrder::Estimate(v) => (sci(v), ""),
                        RunningOrder::Polynomial => (String::new(), "polynomial"),
                        RunningOrder::Insufficient => (String::new(), "insufficient"),
                    };
                    vec![
                        ic.to_string(),
                        k.to_string(),
                        sci(f.coeff(k).magnitude_log()),
                        rho,
                        flag.to_string(),
                    ]
                })
                .collect();
            let entry = SolveEntry {
                f0,
                f1,
                arithmetic: sol.arithmetic,
                amplification_bits: sol.amplification_bits,
                first_unstable_index: sol.first_unstable_index,
                max_residual,
                order,
                modulus_order,
            };
            Ok((entry, rows))
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    let mut solutions = Vec::new();
    for (e, r) in results {
        solutions.push(e);
        rows.extend(r);
    }
    let doc = SolveDoc {
        a: inst.a.render(),
        b: inst.b.render(),
        truncation: n,
        solutions,
    };
    Ok(Artifacts {
        json: vec![("solve.json".into(), to_json(&doc)?)],
        csv: vec![(
            "solve.csv".into(),
            to_csv(&["ic", "k", "log_abs_c", "rho_k", "flag"], &rows)?,
        )],
    })
}

fn hypothesis_options(loaded: &Loaded) -> HypothesisOptions {
    HypothesisOptions {
        reading: loaded.file.reading,
        rays_per_sector: loaded.file.rays_per_sector,
        ..Default::default()
    }
}

#[derive(Serialize)]
struct ClassifyDoc {
    schema_version: u32,
    verdict: Verdict,
    order_comparison: Verdict,
    hypothesis: Option<HypothesisReport>,
}

pub fn classify(loaded: &Loaded) -> Result<Artifacts, CliError> {
    let inst = &loaded.instance;
    let opts = hypothesis_options(loaded);
    let verdict = lab::classify(inst, &opts).map_err(core("classify"))?;
    let hypothesis = match &inst.decomposition {
        Some(_) => Some(lab::main_hypothesis_check(inst, &opts).map_err(core("hypothesis"))?),
        None => None,
    };
    let rows = vec![vec![
        to_label(&verdict.rule_applied)?,
        to_label(&verdict.predicted)?,
    ]];
    let doc = ClassifyDoc {
        schema_version: lab::SCHEMA_VERSION,
        order_comparison: lab::theorem_a_check(inst),
        verdict,
        hypothesis,
    };
    Ok(Artifacts {
        json: vec![("classify.json".into(), to_json(&doc)?)],
        csv: vec![(
            "classify.csv".into(),
            to_csv(&["rule_applied", "predicted"], &rows)?,
        )],
    })
}

fn to_label<T: Serialize>(v: &T) -> Result<String, CliError> {
    match serde_json::to_value(v).map_err(|e| CliError::Internal(e.to_string()))? {
        serde_json::Value::String(s) => Ok(s),
        other => Ok(other.to_string()),
    }
}

#[derive(Serialize)]
struct TraceDoc {
    schema_version: u32,
    reports: Vec<GrowthReport>,
}

pub fn trace(loaded: &Loaded, sweep_phase: f64) -> Result<Artifacts, CliError> {
    let inst = &loaded.instance;
    let opts = TraceOptions {
        r_max: loaded.file.r_max,
        rays_per_sector: loaded.file.rays_per_sector,
        sweep_phase: Some(sweep_phase),
        hypothesis: hypothesis_options(loaded),
        ..Default::default()
    };
    let reports: Vec<GrowthReport> = loaded
        .ics
        .par_iter()
        .map(|&(f0, f1)| {
            lab::proof_trace(inst, f0, f1, loaded.file.truncation, &opts).map_err(core("trace"))
        })
        .collect::<Result<_, _>>()?;
    let mut ray_rows = Vec::new();
    let mut modulus_rows = Vec::new();
    for (ic, rep) in reports.iter().enumerate() {
        for ray in &rep.rays {
            let Some(t) = &ray.trace else { continue };
            let mut margins = ray.a_margin.iter().flat_map(|m| m.margins.iter());
            for (r, u) in t.radii.iter().zip(&t.values) {
                let margin = if *r > 0.0 {
                    margins.next().map(|m| sci(*m)).unwrap_or_default()
                } else {
                    String::new()
                };
                ray_rows.push(vec![
                    ic.to_string(),
                    sci(ray.theta),
                    sci(*r),
                    sci(u.re),
                    sci(u.im),
                    sci(inst.a.eval_polar(*r, ray.theta).magnitude_log()),
                    margin,
                ]);
            }
        }
        for (r, l) in &rep.solution.modulus_order.points {
            modulus_rows.push(vec![ic.to_string(), sci(*r), sci(*l)]);
        }
    }
    let doc = TraceDoc {
        schema_version: lab::SCHEMA_VERSION,
        reports,
    };
    Ok(Artifacts {
        json: vec![("trace.json".into(), to_json(&doc)?)],
        csv: vec![
            (
                "trace_rays.csv".into(),
                to_csv(
                    &["ic", "theta", "r", "re_u", "im_u", "log_abs_a", "margin"],
                    &ray_rows,
                )?,
            ),
            (
                "trace_modulus.csv".into(),
                to_csv(&["ic", "r", "log_log_m"], &modulus_rows)?,
            ),
        ],
    })
}

fn default_grid(n: usize) -> Vec<ExpPoly> {
    let cs = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    [n + 1, n + 2]
        .iter()
        .flat_map(|&k| {
            cs.iter()
                .map(move |&c| ExpPoly::exp_of(ComplexPoly::monomial(c, k)))
        })
        .collect()
}

#[derive(Serialize)]
struct WitnessDoc {
    p: String,
    passes: usize,
    results: Vec<WitnessResult>,
}

pub fn witness_search(loaded: &Loaded) -> Result<Artifacts, CliError> {
    let w = loaded.file.witness.as_ref();
    let p = match w.and_then(|w| w.p.as_ref()) {
        Some(text) => spec::parse_poly("witness.P", text)?,
        None => spec::sector_poly(loaded)?,
    };
    let n = p.degree_or_zero();
    let grid = match w.and_then(|w| w.candidates.as_ref()) {
        Some(list) => list
            .iter()
            .enumerate()
            .map(|(i, c)| spec::parse_expr(&format!("witness.candidates[{i}]"), c))
            .collect::<Result<Vec<_>, _>>()?,
        None => default_grid(n),
    };
    let results =
        lab::witness_search(&p, &grid, &hypothesis_options(loaded)).map_err(core("witness"))?;
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![
                r.candidate.clone(),
                r.pass.to_string(),
                r.decay_witness.map(sci).unwrap_or_default(),
                r.failures
                    .iter()
                    .map(|f| f.check.as_str())
                    .collect::<Vec<_>>()
                    .join(";"),
            ]
        })
        .collect();
    let doc = WitnessDoc {
        p: render_poly(&p),
        passes: results.iter().filter(|r| r.pass).count(),
        results,
    };
    Ok(Artifacts {
        json: vec![("witness.json".into(), to_json(&doc)?)],
        csv: vec![(
            "witness.csv".into(),
            to_csv(&["candidate", "pass", "decay_witness", "failed"], &rows)?,
        )],
    })
}
