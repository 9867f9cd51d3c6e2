//! Machine-readable output: JSON objects with a fixed field order and
//! floats printed with 17 significant digits, JSON lines, and the scan-grid
//! CSV layout.

use std::fmt::Write as _;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::norms::{QuadratureResult, RegularizedK0, ResidueSeriesResult};
use crate::polescan::{EpClassification, PoleRecord, ScanGrid};

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Array(Vec<Field>),
    Object(Record),
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Num(v)
    }
}

impl From<i64> for Field {
    fn from(v: i64) -> Self {
        Field::Int(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as i64)
    }
}

impl From<u64> for Field {
    fn from(v: u64) -> Self {
        Field::Int(v as i64)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Bool(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Str(v.to_string())
    }
}

impl From<String> for Field {
    fn from(v: String) -> Self {
        Field::Str(v)
    }
}

impl From<Record> for Field {
    fn from(v: Record) -> Self {
        Field::Object(v)
    }
}

impl<T: Into<Field>> From<Option<T>> for Field {
    fn from(v: Option<T>) -> Self {
        v.map_or(Field::Null, Into::into)
    }
}

/// An ordered JSON object.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(String, Field)>);

impl Record {
    pub fn new() -> Self {
        Record(Vec::new())
    }

    pub fn with(mut self, key: &str, value: impl Into<Field>) -> Self {
        self.0.push((key.to_string(), value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Field> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn num(&self, key: &str) -> Option<f64> {
        match self.get(key)? {
            Field::Num(v) => Some(*v),
            Field::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        match self.get(key)? {
            Field::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn keys(&self) -> Vec<&str> {
        self.0.iter().map(|(k, _)| k.as_str()).collect()
    }

    pub fn to_json(&self) -> String {
        let mut out = String::new();
        write_object(&mut out, self);
        out
    }

    pub fn parse(text: &str) -> Result<Record> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::domain(format!("malformed JSON: {e}")))?;
        match from_value(&value) {
            Field::Object(r) => Ok(r),
            _ => Err(Error::domain("expected a JSON object")),
        }
    }
}

/// 17 significant digits; non-finite values become `null`.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

fn write_string(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
}

fn write_field(out: &mut String, f: &Field) {
    match f {
        Field::Null => out.push_str("null"),
        Field::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Field::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Field::Num(v) => out.push_str(&fmt_float(*v)),
        Field::Str(s) => write_string(out, s),
        Field::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_field(out, item);
            }
            out.push(']');
        }
        Field::Object(r) => write_object(out, r),
    }
}

fn write_object(out: &mut String, r: &Record) {
    out.push('{');
    for (i, (k, v)) in r.0.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_string(out, k);
        out.push(':');
        write_field(out, v);
    }
    out.push('}');
}

fn from_value(v: &Value) -> Field {
    match v {
        Value::Null => Field::Null,
        Value::Bool(b) => Field::Bool(*b),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Field::Int(i),
            None => Field::Num(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => Field::Str(s.clone()),
        Value::Array(items) => Field::Array(items.iter().map(from_value).collect()),
        Value::Object(map) => Field::Object(Record(map.iter().map(|(k, v)| (k.clone(), from_value(v))).collect())),
    }
}

pub fn to_json_array(records: &[Record]) -> String {
    let mut out = String::from("[");
    for (i, r) in records.iter().enumerate() {
        if i > 0 {
            out.push_str(",\n");
        }
        write_object(&mut out, r);
    }
    out.push_str("]\n");
    out
}

pub fn parse_json_array(text: &str) -> Result<Vec<Record>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::domain(format!("malformed JSON: {e}")))?;
    let Value::Array(items) = value else {
        return Err(Error::domain("expected a JSON array"));
    };
    items
        .iter()
        .map(|v| match from_value(v) {
            Field::Object(r) => Ok(r),
            _ => Err(Error::domain("expected an array of objects")),
        })
        .collect()
}

pub fn to_jsonl(records: &[Record]) -> String {
    records.iter().map(|r| r.to_json() + "\n").collect()
}

pub fn parse_jsonl(text: &str) -> Result<Vec<Record>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(Record::parse).collect()
}

pub fn pole_record(p: &PoleRecord) -> Record {
    Record::new()
        .with("k", p.k)
        .with("nu_re", p.nu_location.re)
        .with("nu_im", p.nu_location.im)
        .with("res_re", p.residue.re)
        .with("res_im", p.residue.im)
        .with("source", p.source.as_str())
}

pub fn ep_record(c: &EpClassification) -> Record {
    Record::new()
        .with("k", c.k)
        .with("kind", c.kind.as_str())
        .with("count_in_default_window", c.pole_count_in_window)
        .with("total_poles", c.total_poles)
        .with("locations", Field::Array(c.locations.iter().map(|z| Field::Num(z.re)).collect()))
}

pub fn norm_record(k: f64, rho: f64, method: &str, value: f64, error_estimate: f64, terms_or_evals: usize) -> Record {
    Record::new()
        .with("k", k)
        .with("rho", rho)
        .with("method", method)
        .with("value", value)
        .with("error_estimate", error_estimate)
        .with("terms_or_evals", terms_or_evals)
}

pub fn quadrature_record(k: f64, rho: f64, q: &QuadratureResult) -> Record {
    norm_record(k, rho, "quadrature", q.value, q.abs_error_estimate, q.evaluations)
}

pub fn series_record(k: f64, rho: f64, s: &ResidueSeriesResult) -> Record {
    norm_record(k, rho, "series", s.value, s.error_estimate, s.terms_used)
}

pub fn regularized_record(rho: f64, r: &RegularizedK0) -> Record {
    let err = r.numeric.abs_error_estimate.max((r.numeric.value - r.analytic).abs());
    norm_record(0.0, rho, "regularized", r.numeric.value, err, r.numeric.evaluations)
}

/// Header `re_nu,x_0,...,x_{nx-1}`, then one row per `Im nu`:
/// `y_j,v_0j,...`. Failed cells are written as `NaN`.
pub fn grid_csv(g: &ScanGrid) -> String {
    let mut out = String::from("re_nu");
    for x in g.re_axis() {
        out.push(',');
        out.push_str(&format!("{x:.16e}"));
    }
    out.push('\n');
    for (iy, y) in g.im_axis().iter().enumerate() {
        out.push_str(&format!("{y:.16e}"));
        for ix in 0..g.nx {
            let v = g.get(ix, iy);
            out.push(',');
            if v.is_finite() {
                out.push_str(&format!("{v:.16e}"));
            } else {
                out.push_str("NaN");
            }
        }
        out.push('\n');
    }
    out
}

/// Reads back [`grid_csv`] output as `(re axis, im axis, row-major values)`.
pub fn parse_grid_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let bad = |what: &str| Error::domain(format!("malformed grid CSV: {what}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty"))?;
    let mut cols = header.split(',');
    if cols.next() != Some("re_nu") {
        return Err(bad("header must start with re_nu"));
    }
    let xs: Vec<f64> = cols.map(|c| c.parse().map_err(|_| bad(c))).collect::<Result<_>>()?;
    let mut ys = Vec::new();
    let mut values = Vec::new();
    for line in lines {
        let mut cells = line.split(',');
        let y = cells.next().ok_or_else(|| bad("empty row"))?;
        ys.push(y.parse().map_err(|_| bad(y))?);
        let row: Vec<f64> = cells.map(|c| c.parse().map_err(|_| bad(c))).collect::<Result<_>>()?;
        if row.len() != xs.len() {
            return Err(bad("row length differs from header"));
        }
        values.extend(row);
    }
    Ok((xs, ys, values))
}

pub fn grid_metadata(g: &ScanGrid, timestamp: u64) -> Record {
    Record::new()
        .with("k", g.k)
        .with("rho", g.rho)
        .with("re_min", g.window.re_min)
        .with("re_max", g.window.re_max)
        .with("im_min", g.window.im_min)
        .with("im_max", g.window.im_max)
        .with("nx", g.nx)
        .with("ny", g.ny)
        .with("failed_cells", g.failed_cells())
        .with("timestamp", timestamp)
        .with("version", env!("CARGO_PKG_VERSION"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn float_format() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(-0.1), "-1.0000000000000001e-1");
        assert_eq!(fmt_float(f64::NAN), "null");
    }

    #[test]
    fn field_order_preserved() {
        let r = Record::new().with("z", 1.5).with("a", "x").with("m", 3usize);
        let text = r.to_json();
        assert_eq!(text, r#"{"z":1.5000000000000000e0,"a":"x","m":3}"#);
        let back = Record::parse(&text).unwrap();
        assert_eq!(back.keys(), vec!["z", "a", "m"]);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn nested_and_null() {
        let r = Record::new()
            .with("inner", Record::new().with("v", f64::NAN))
            .with("list", Field::Array(vec![Field::Num(2.0), Field::Null]))
            .with("none", None::<f64>);
        let text = r.to_json();
        assert_eq!(Record::parse(&text).unwrap().to_json(), text);
    }

    #[test]
    fn jsonl_round_trip() {
        let rs = vec![Record::new().with("k", 0.5), Record::new().with("k", -1.25)];
        let text = to_jsonl(&rs);
        assert_eq!(text.lines().count(), 2);
        assert_eq!(to_jsonl(&parse_jsonl(&text).unwrap()), text);
        let arr = to_json_array(&rs);
        assert_eq!(to_json_array(&parse_json_array(&arr).unwrap()), arr);
    }

    proptest! {
        #[test]
        fn floats_round_trip(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let r = Record::new().with("v", v);
            let back = Record::parse(&r.to_json()).unwrap();
            prop_assert_eq!(back.num("v").unwrap().to_bits(), v.to_bits());
            prop_assert_eq!(back.to_json(), r.to_json());
        }
    }
}
