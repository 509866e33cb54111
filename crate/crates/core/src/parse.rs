//! Expression language for exponential polynomials.
//!
//! ```text
//! expr     = term { ("+" | "-") term } ;
//! term     = factor { "*" factor } ;
//! factor   = ("+" | "-") factor | power ;
//! power    = primary [ "^" count ] ;
//! count    = integer | "{" integer "}" | "(" integer ")" ;
//! primary  = number [ "i" ] | "i" | "z" | "(" expr ")"
//!          | "exp" "(" expr ")"
//!          | "e" "^" ( "{" expr "}" | factor )
//!          | "e" ;
//! number   = digit { digit } [ "." { digit } ] | "." digit { digit } ;
//! ```
//!
//! The argument of `exp(..)` / `e^{..}` must itself be a polynomial in `z`.
//! Whitespace is ignored between tokens. Anything else is a syntax error
//! carrying the byte offset where parsing stopped.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::poly::ComplexPoly;

const MAX_POWER: u32 = 10_000;

pub fn parse_exppoly(text: &str) -> Result<ExpPoly> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

/// Parses an expression that must reduce to a polynomial.
pub fn parse_poly(text: &str) -> Result<ComplexPoly> {
    let e = parse_exppoly(text)?;
    e.as_polynomial()
        .ok_or_else(|| Error::NotPolynomial(text.to_string()))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<ExpPoly> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<ExpPoly> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<ExpPoly> {
        if self.eat(b'-') {
            return Ok(-&self.factor()?);
        }
        if self.eat(b'+') {
            return self.factor();
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExpPoly> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let n = self.count()?;
            return Ok(base.pow(n));
        }
        Ok(base)
    }

    fn count(&mut self) -> Result<u32> {
        let close = if self.eat(b'{') {
            Some(b'}')
        } else if self.eat(b'(') {
            Some(b')')
        } else {
            None
        };
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("power must be a non-negative integer"));
        }
        let n: u32 = std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .filter(|&n| n <= MAX_POWER)
            .ok_or_else(|| Error::Parse {
                position: start,
                message: "power too large".into(),
            })?;
        if let Some(c) = close {
            self.expect(c)?;
        }
        Ok(n)
    }

    fn word(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn primary(&mut self) -> Result<ExpPoly> {
        let c = self
            .peek()
            .ok_or_else(|| self.error("unexpected end of input"))?;
        if c.is_ascii_digit() || c == b'.' {
            let x = self.number()?;
            if self.src.get(self.pos) == Some(&b'i') {
                self.pos += 1;
                return Ok(ExpPoly::constant(Complex64::new(0.0, x)));
            }
            return Ok(ExpPoly::constant(Complex64::new(x, 0.0)));
        }
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            let w = self.word().to_string();
            return match w.as_str() {
                "z" => Ok(ExpPoly::z()),
                "i" => Ok(ExpPoly::constant(Complex64::new(0.0, 1.0))),
                "exp" => {
                    self.expect(b'(')?;
                    let arg_pos = self.pos;
                    let arg = self.expr()?;
                    self.expect(b')')?;
                    exp_of(&arg, arg_pos)
                }
                "e" => {
                    if !self.eat(b'^') {
                        return Ok(ExpPoly::constant(Complex64::new(std::f64::consts::E, 0.0)));
                    }
                    let arg_pos = self.pos;
                    let arg = if self.eat(b'{') {
                        let a = self.expr()?;
                        self.expect(b'}')?;
                        a
                    } else {
                        self.factor()?
                    };
                    exp_of(&arg, arg_pos)
                }
                _ => Err(Error::Parse {
                    position: start,
                    message: format!("unknown identifier '{w}'"),
                }),
            };
        }
        Err(self.error(&format!("unexpected character '{}'", c as char)))
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        s.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or(Error::Parse {
                position: start,
                message: format!("malformed number '{s}'"),
            })
    }
}

fn exp_of(arg: &ExpPoly, position: usize) -> Result<ExpPoly> {
    let q = arg
        .as_polynomial()
        .ok_or(Error::NonPolynomialExponent { position })?;
    Ok(ExpPoly::exp_of(q))
}

fn render_real(x: f64) -> String {
    if x < 0.0 || (x == 0.0 && x.is_sign_negative()) {
        format!("(-{})", -x)
    } else {
        format!("{x}")
    }
}

pub fn render_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        render_real(c.re)
    } else if c.re == 0.0 {
        if c.im < 0.0 {
            format!("(-{}i)", -c.im)
        } else {
            format!("{}i", c.im)
        }
    } else {
        let sign = if c.im < 0.0 { '-' } else { '+' };
        format!("({}{}{}i)", c.re, sign, c.im.abs())
    }
}

fn render_monomial(c: Complex64, k: usize, implicit_one: bool) -> String {
    let z = match k {
        0 => None,
        1 => Some("z".to_string()),
        _ => Some(format!("z^{k}")),
    };
    match z {
        Some(z) if implicit_one && c == Complex64::new(1.0, 0.0) => z,
        Some(z) => format!("{}*{}", render_complex(c), z),
        None => render_complex(c),
    }
}

pub fn render_poly(p: &ComplexPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let parts: Vec<String> = p
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
        .map(|(k, &c)| render_monomial(c, k, true))
        .collect();
    parts.join(" + ")
}

pub fn render_exppoly(e: &ExpPoly) -> String {
    if e.is_zero() {
        return "0".into();
    }
    let parts: Vec<String> = e
        .terms()
        .iter()
        .map(|t| {
            let has_exp = !t.exponent.is_zero();
            let head = render_monomial(t.coeff, t.power as usize, has_exp || t.power > 0);
            if !has_exp {
                head
            } else if t.coeff == Complex64::new(1.0, 0.0) && t.power == 0 {
                format!("exp({})", render_poly(&t.exponent))
            } else {
                format!("{}*exp({})", head, render_poly(&t.exponent))
            }
        })
        .collect();
    parts.join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exppoly::Term;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_exponential() {
        let e = parse_exppoly("e^{z}").unwrap();
        assert_eq!(
            e,
            ExpPoly::new(vec![Term::new(c(1.0, 0.0), 0, ComplexPoly::z())])
        );
        assert_eq!(parse_exppoly("exp(z)").unwrap(), e);
        assert_eq!(parse_exppoly("e^z").unwrap(), e);
    }

    #[test]
    fn product_expands() {
        let e = parse_exppoly("(z+1)*e^{2*z} + 3").unwrap();
        let two_z = ComplexPoly::from_real(&[0.0, 2.0]);
        let expected = ExpPoly::new(vec![
            Term::new(c(1.0, 0.0), 1, two_z.clone()),
            Term::new(c(1.0, 0.0), 0, two_z),
            Term::new(c(3.0, 0.0), 0, ComplexPoly::zero()),
        ]);
        assert_eq!(e, expected);
    }

    #[test]
    fn nested_exponential_rejected() {
        match parse_exppoly("e^{e^{z}}") {
            Err(Error::NonPolynomialExponent { position }) => assert_eq!(position, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_exppoly("z + * 2").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                position: 4,
                message: "unexpected character '*'".into()
            }
        );
        assert!(matches!(
            parse_exppoly("sin(z)"),
            Err(Error::Parse { position: 0, .. })
        ));
        assert!(matches!(parse_exppoly("z^1.5"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_exppoly("(z+1"),
            Err(Error::Parse { position: 4, .. })
        ));
        assert!(matches!(
            parse_exppoly("z z"),
            Err(Error::Parse { position: 2, .. })
        ));
        assert!(matches!(
            parse_exppoly(""),
            Err(Error::Parse { position: 0, .. })
        ));
    }

    #[test]
    fn complex_literals_and_signs() {
        let e = parse_exppoly("-(e^{z}+1)").unwrap();
        assert_eq!(e.terms().len(), 2);
        assert!(e.terms().iter().all(|t| t.coeff == c(-1.0, 0.0)));
        let p = parse_poly("(1+2i)*z^2 - 3i").unwrap();
        assert_eq!(p.coeffs(), &[c(0.0, -3.0), c(0.0, 0.0), c(1.0, 2.0)]);
        let q = parse_exppoly("e^{-z}").unwrap();
        assert_eq!(q.terms()[0].exponent, ComplexPoly::from_real(&[0.0, -1.0]));
        assert_eq!(
            parse_poly("(z+1)^{2}").unwrap(),
            ComplexPoly::from_real(&[1.0, 2.0, 1.0])
        );
    }

    fn arb_c() -> impl Strategy<Value = Complex64> {
        let comp = prop_oneof![
            Just(0.0),
            Just(1.0),
            Just(-1.0),
            -1e6f64..1e6,
            -1e-3f64..1e-3
        ];
        (comp.clone(), comp).prop_map(|(a, b)| c(a, b))
    }

    prop_compose! {
        fn arb_exppoly()(terms in prop::collection::vec(
            (arb_c(), 0u32..5, prop::collection::vec(arb_c(), 0..4)), 0..6)) -> ExpPoly {
            ExpPoly::new(terms.into_iter().map(|(c, k, q)| Term::new(c, k, ComplexPoly::new(q))).collect())
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn render_parse_round_trip(e in arb_exppoly()) {
            let text = render_exppoly(&e);
            let back = parse_exppoly(&text).unwrap();
            prop_assert_eq!(back, e, "{}", text);
        }
    }
}
