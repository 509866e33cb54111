//! Deterministic JSON and CSV rendering.
//!
//! JSON objects have sorted keys and every float is written as `%.12e`.
//! Non-finite floats become `null` and their paths are listed under
//! `non_finite_fields` at the top level.

use std::io;

use serde::Serialize;
use serde_json::{Map, Value};
use serde_value::Value as Raw;

use crate::CliError;

/// `x` as C's `%.12e`.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    let s = format!("{x:.12e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
}

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(sci(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

fn key_text(k: &Raw) -> String {
    match k {
        Raw::String(s) => s.clone(),
        other => format!("{other:?}"),
    }
}

fn convert(v: Raw, path: &str, bad: &mut Vec<String>) -> Value {
    let float = |x: f64, bad: &mut Vec<String>| {
        if x.is_finite() {
            Value::from(x)
        } else {
            bad.push(path.to_string());
            Value::Null
        }
    };
    match v {
        Raw::Bool(b) => Value::Bool(b),
        Raw::U8(x) => x.into(),
        Raw::U16(x) => x.into(),
        Raw::U32(x) => x.into(),
        Raw::U64(x) => x.into(),
        Raw::I8(x) => x.into(),
        Raw::I16(x) => x.into(),
        Raw::I32(x) => x.into(),
        Raw::I64(x) => x.into(),
        Raw::F32(x) => float(x as f64, bad),
        Raw::F64(x) => float(x, bad),
        Raw::Char(c) => Value::String(c.to_string()),
        Raw::String(s) => Value::String(s),
        Raw::Unit | Raw::Option(None) => Value::Null,
        Raw::Option(Some(b)) | Raw::Newtype(b) => convert(*b, path, bad),
        Raw::Seq(items) => Value::Array(
            items
                .into_iter()
                .enumerate()
                .map(|(i, x)| convert(x, &format!("{path}[{i}]"), bad))
                .collect(),
        ),
        Raw::Map(m) => {
            let mut out = Map::new();
            for (k, x) in m {
                let k = key_text(&k);
                let p = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                out.insert(k, convert(x, &p, bad));
            }
            Value::Object(out)
        }
        Raw::Bytes(b) => Value::Array(b.into_iter().map(Value::from).collect()),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let raw = serde_value::to_value(value).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut bad = Vec::new();
    let mut json = convert(raw, "", &mut bad);
    if !bad.is_empty() {
        match &mut json {
            Value::Object(m) => {
                m.insert("non_finite_fields".into(), Value::from(bad));
            }
            _ => {
                return Err(CliError::Internal(
                    "non-finite float outside an object".into(),
                ))
            }
        }
    }
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    json.serialize(&mut ser)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CliError::Internal(e.to_string()))
}

/// CSV with a header row; cells are preformatted.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let internal = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(header).map_err(internal)?;
    for r in rows {
        w.write_record(r).map_err(internal)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponent() {
        assert_eq!(sci(1.0), "1.000000000000e+00");
        assert_eq!(sci(-0.00123), "-1.230000000000e-03");
        assert_eq!(sci(6.02e23), "6.020000000000e+23");
        assert_eq!(sci(1e-300), "1.000000000000e-300");
        assert_eq!(sci(0.0), "0.000000000000e+00");
        assert_eq!(sci(f64::NEG_INFINITY), "-inf");
    }

    #[derive(Serialize)]
    struct Doc {
        zeta: f64,
        alpha: Vec<f64>,
        n: usize,
        label: Option<String>,
    }

    #[test]
    fn sorted_keys_and_flags() {
        let d = Doc {
            zeta: 0.5,
            alpha: vec![f64::NAN, 2.0],
            n: 3,
            label: None,
        };
        let s = to_json(&d).unwrap();
        assert_eq!(
            s,
            "{\"alpha\":[null,2.000000000000e+00],\"label\":null,\"n\":3,\"non_finite_fields\":[\"alpha[0]\"],\"zeta\":5.000000000000e-01}\n"
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["zeta"], 0.5);
    }
}
