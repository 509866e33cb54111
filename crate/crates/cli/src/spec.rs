//! Problem spec files.

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;
use sgl_core::lab::{ProblemInstance, Reading};
use sgl_core::{ComplexPoly, Error, ExpPoly};

use crate::CliError;

pub const MIN_TRUNCATION: usize = 100;
pub const MIN_R_MAX: f64 = 10.0;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "B")]
    pub b: String,
    #[serde(default)]
    pub decomposition: Option<DecompositionSpec>,
    #[serde(default = "default_ics")]
    pub initial_conditions: Vec<[f64; 4]>,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_rays")]
    pub rays_per_sector: usize,
    #[serde(default)]
    pub reading: Reading,
    #[serde(default)]
    pub witness: Option<WitnessSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionSpec {
    pub d: String,
    #[serde(rename = "P")]
    pub p: String,
}

/// Candidate grid for `witness-search`. Without `candidates`, the grid is
/// `e^{c z^{n+1}}` and `e^{c z^{n+2}}` for `c ∈ {1, i, −1, −i}`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSpec {
    #[serde(rename = "P", default)]
    pub p: Option<String>,
    #[serde(default)]
    pub candidates: Option<Vec<String>>,
}

fn default_ics() -> Vec<[f64; 4]> {
    vec![[1.0, 0.0, 0.0, 0.0]]
}
fn default_truncation() -> usize {
    1000
}
fn default_r_max() -> f64 {
    40.0
}
fn default_rays() -> usize {
    2
}

pub struct Loaded {
    pub file: SpecFile,
    pub instance: ProblemInstance,
    pub ics: Vec<(Complex64, Complex64)>,
}

fn field<T>(name: &str, r: sgl_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Core {
        context: format!("field `{name}`"),
        error: e,
    })
}

pub fn parse_expr(name: &str, text: &str) -> Result<ExpPoly, CliError> {
    field(name, ExpPoly::parse(text))
}

pub fn parse_poly(name: &str, text: &str) -> Result<ComplexPoly, CliError> {
    field(name, sgl_core::parse::parse_poly(text))
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let file: SpecFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let a = parse_expr("A", &file.a)?;
    let b = parse_expr("B", &file.b)?;
    let dec = match &file.decomposition {
        Some(d) => Some(sgl_core::lab::Decomposition {
            d: parse_expr("decomposition.d", &d.d)?,
            p: parse_poly("decomposition.P", &d.p)?,
        }),
        None => None,
    };
    if let Some(w) = &file.witness {
        if let Some(p) = &w.p {
            parse_poly("witness.P", p)?;
        }
        for (i, c) in w.candidates.iter().flatten().enumerate() {
            parse_expr(&format!("witness.candidates[{i}]"), c)?;
        }
    }
    if file.truncation < MIN_TRUNCATION {
        return Err(CliError::Semantic(format!(
            "truncation {} below {MIN_TRUNCATION}",
            file.truncation
        )));
    }
    if !(file.r_max >= MIN_R_MAX) || !file.r_max.is_finite() {
        return Err(CliError::Semantic(format!(
            "r_max {} below {MIN_R_MAX}",
            file.r_max
        )));
    }
    if file.rays_per_sector == 0 {
        return Err(CliError::Semantic(
            "rays_per_sector must be positive".into(),
        ));
    }
    if file.initial_conditions.is_empty() {
        return Err(CliError::Semantic("no initial conditions".into()));
    }
    if file
        .initial_conditions
        .iter()
        .flatten()
        .any(|x| !x.is_finite())
    {
        return Err(CliError::Semantic(
            "initial conditions must be finite".into(),
        ));
    }
    let ics = file
        .initial_conditions
        .iter()
        .map(|v| (Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])))
        .collect();
    let instance = ProblemInstance::new(a, b, dec).map_err(|e| CliError::Core {
        context: "decomposition".into(),
        error: e,
    })?;
    Ok(Loaded {
        file,
        instance,
        ics,
    })
}

/// `P` for commands that need one: the decomposition's, else the exponent
/// of `A` when `A = c·e^{P}`.
pub fn sector_poly(loaded: &Loaded) -> Result<ComplexPoly, CliError> {
    if let Some(d) = &loaded.instance.decomposition {
        return Ok(d.p.clone());
    }
    match loaded.instance.a.terms() {
        [t] if t.power == 0 => Ok(t.exponent.without_constant()),
        _ => Err(CliError::Core {
            context: "P".into(),
            error: Error::MissingDecomposition,
        }),
    }
}
