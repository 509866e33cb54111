//! Exponential polynomials `Σ c_j · z^{k_j} · e^{Q_j(z)}`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::ComplexPoly;
use crate::scaled::{sum_with_max, ScaledComplex};

/// One summand `coeff · z^power · e^{exponent(z)}`.
#[derive(Clone, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub power: u32,
    pub exponent: ComplexPoly,
}

impl Term {
    pub fn new(coeff: Complex64, power: u32, exponent: ComplexPoly) -> Self {
        Self {
            coeff,
            power,
            exponent,
        }
    }

    fn same_shape(&self, other: &Term) -> bool {
        self.power == other.power && self.exponent == other.exponent
    }

    fn shape_cmp(&self, other: &Term) -> Ordering {
        self.exponent
            .structural_cmp(&other.exponent)
            .then_with(|| self.power.cmp(&other.power))
    }

    /// Principal-branch `ln` of the term's value at `z`, or `None` at `z = 0`
    /// with a positive power.
    fn log_value(&self, z: Complex64) -> Option<Complex64> {
        let mut w = self.coeff.ln() + self.exponent.eval(z);
        if self.power > 0 {
            if z == Complex64::new(0.0, 0.0) {
                return None;
            }
            w += z.ln() * self.power as f64;
        }
        Some(w)
    }
}

/// Normalized exponential polynomial: terms with equal `(power, exponent)`
/// are merged, zero coefficients dropped, and terms kept in a canonical
/// order.
#[derive(Clone, PartialEq, Default)]
pub struct ExpPoly {
    terms: Vec<Term>,
}

impl ExpPoly {
    pub fn new(mut terms: Vec<Term>) -> Self {
        terms.retain(|t| t.coeff != Complex64::new(0.0, 0.0));
        terms.sort_by(Term::shape_cmp);
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.same_shape(&t) => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != Complex64::new(0.0, 0.0));
        Self { terms: merged }
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![Term::new(c, 0, ComplexPoly::zero())])
    }

    pub fn z() -> Self {
        Self::new(vec![Term::new(
            Complex64::new(1.0, 0.0),
            1,
            ComplexPoly::zero(),
        )])
    }

    /// `e^{q(z)}`.
    pub fn exp_of(q: ComplexPoly) -> Self {
        Self::new(vec![Term::new(Complex64::new(1.0, 0.0), 0, q)])
    }

    pub fn from_poly(p: &ComplexPoly) -> Self {
        Self::new(
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(k, &c)| Term::new(c, k as u32, ComplexPoly::zero()))
                .collect(),
        )
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(
            self.terms
                .iter()
                .map(|t| Term::new(t.coeff * s, t.power, t.exponent.clone()))
                .collect(),
        )
    }

    /// `self · e^{p}`.
    pub fn mul_exp(&self, p: &ComplexPoly) -> Self {
        Self::new(
            self.terms
                .iter()
                .map(|t| Term::new(t.coeff, t.power, &t.exponent + p))
                .collect(),
        )
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(Complex64::new(1.0, 0.0));
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let mut out = Vec::new();
        for t in &self.terms {
            if t.power > 0 {
                out.push(Term::new(
                    t.coeff * t.power as f64,
                    t.power - 1,
                    t.exponent.clone(),
                ));
            }
            for (l, &q) in t.exponent.derivative().coeffs().iter().enumerate() {
                out.push(Term::new(
                    t.coeff * q,
                    t.power + l as u32,
                    t.exponent.clone(),
                ));
            }
        }
        Self::new(out)
    }

    /// The polynomial this function equals, if every exponent is constant.
    pub fn as_polynomial(&self) -> Option<ComplexPoly> {
        if !self.terms.iter().all(|t| t.exponent.is_constant()) {
            return None;
        }
        let deg = self
            .terms
            .iter()
            .map(|t| t.power as usize)
            .max()
            .unwrap_or(0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); deg + 1];
        for t in &self.terms {
            coeffs[t.power as usize] += t.coeff * t.exponent.coeff(0).exp();
        }
        Some(ComplexPoly::new(coeffs))
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.iter().all(|t| t.exponent.is_constant())
    }

    /// Order of growth: the largest exponent degree, 0 for polynomials.
    pub fn exact_order(&self) -> Result<usize> {
        if self.is_zero() {
            return Err(Error::ZeroFunction);
        }
        Ok(self
            .terms
            .iter()
            .map(|t| t.exponent.degree_or_zero())
            .max()
            .unwrap_or(0))
    }

    /// Value at `z`, summed in scaled form with the largest term factored
    /// out. A zero result carries the `-inf` magnitude marker.
    pub fn eval(&self, z: ScaledComplex) -> ScaledComplex {
        self.eval_complex(z.to_complex())
    }

    pub fn eval_complex(&self, z: Complex64) -> ScaledComplex {
        let vals: Vec<ScaledComplex> = self
            .terms
            .iter()
            .filter_map(|t| t.log_value(z))
            .map(ScaledComplex::exp)
            .collect();
        sum_with_max(&vals).0
    }

    /// Value along the ray `r e^{iθ}`.
    pub fn eval_polar(&self, r: f64, theta: f64) -> ScaledComplex {
        self.eval_complex(Complex64::from_polar(r, theta))
    }

    /// Ordinary complex evaluation, term by term. Overflows where the scaled
    /// path does not; used as a cross-check.
    pub fn eval_naive(&self, z: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coeff * z.powu(t.power) * t.exponent.eval(z).exp())
            .sum()
    }

    /// Parses the expression grammar documented in [`crate::parse`].
    pub fn parse(text: &str) -> Result<Self> {
        crate::parse::parse_exppoly(text)
    }

    pub fn render(&self) -> String {
        crate::parse::render_exppoly(self)
    }
}

impl Add for &ExpPoly {
    type Output = ExpPoly;
    fn add(self, rhs: &ExpPoly) -> ExpPoly {
        ExpPoly::new(self.terms.iter().chain(rhs.terms.iter()).cloned().collect())
    }
}

impl Neg for &ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for &ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: &ExpPoly) -> ExpPoly {
        self + &(-rhs)
    }
}

impl Mul for &ExpPoly {
    type Output = ExpPoly;
    fn mul(self, rhs: &ExpPoly) -> ExpPoly {
        let mut out = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                out.push(Term::new(
                    a.coeff * b.coeff,
                    a.power + b.power,
                    &a.exponent + &b.exponent,
                ));
            }
        }
        ExpPoly::new(out)
    }
}

impl fmt::Debug for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExpPoly({})", self.render())
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
