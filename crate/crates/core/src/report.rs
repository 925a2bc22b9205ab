//! Deterministic JSON and CSV rendering.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), non-finite
//! values as `null`, and object keys in insertion order, so equal inputs
//! give byte-identical documents.

use std::fmt::Write as _;

use crate::paths::CovarianceCell;
use crate::theorems::{IdentityReport, Mode};

#[derive(Clone, Debug, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    UInt(u64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization")
}

impl Json {
    pub fn obj() -> Self {
        Json::Obj(Vec::new())
    }

    /// Appends a key to an object; no-op on other variants.
    pub fn with(mut self, key: &str, value: impl Into<Json>) -> Self {
        if let Json::Obj(fields) = &mut self {
            fields.push((key.to_string(), value.into()));
        }
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, depth: usize) {
        let pad = |d: usize| "  ".repeat(d);
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => write!(out, "{i}").unwrap(),
            Json::UInt(u) => write!(out, "{u}").unwrap(),
            Json::Num(x) => out.push_str(&num(*x)),
            Json::Str(s) => out.push_str(&quote(s)),
            Json::Arr(items) if items.is_empty() => out.push_str("[]"),
            Json::Arr(items) => {
                out.push_str("[\n");
                for (i, it) in items.iter().enumerate() {
                    out.push_str(&pad(depth + 1));
                    it.write(out, depth + 1);
                    out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
                }
                out.push_str(&pad(depth));
                out.push(']');
            }
            Json::Obj(fields) if fields.is_empty() => out.push_str("{}"),
            Json::Obj(fields) => {
                out.push_str("{\n");
                for (i, (k, v)) in fields.iter().enumerate() {
                    write!(out, "{}{}: ", pad(depth + 1), quote(k)).unwrap();
                    v.write(out, depth + 1);
                    out.push_str(if i + 1 < fields.len() { ",\n" } else { "\n" });
                }
                out.push_str(&pad(depth));
                out.push('}');
            }
        }
    }
}

impl From<f64> for Json {
    fn from(x: f64) -> Self {
        Json::Num(x)
    }
}

impl From<bool> for Json {
    fn from(b: bool) -> Self {
        Json::Bool(b)
    }
}

impl From<u64> for Json {
    fn from(u: u64) -> Self {
        Json::UInt(u)
    }
}

impl From<usize> for Json {
    fn from(u: usize) -> Self {
        Json::UInt(u as u64)
    }
}

impl From<&str> for Json {
    fn from(s: &str) -> Self {
        Json::Str(s.to_string())
    }
}

impl From<String> for Json {
    fn from(s: String) -> Self {
        Json::Str(s)
    }
}

impl<T: Into<Json>> From<Option<T>> for Json {
    fn from(v: Option<T>) -> Self {
        v.map_or(Json::Null, Into::into)
    }
}

impl<T: Into<Json>> From<Vec<T>> for Json {
    fn from(v: Vec<T>) -> Self {
        Json::Arr(v.into_iter().map(Into::into).collect())
    }
}

/// Field names of one identity object, in output order.
pub const REPORT_FIELDS: [&str; 11] = [
    "name", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_gap", "rel_gap", "tol", "pass", "seed", "params",
];

fn report_params(r: &IdentityReport) -> Json {
    let mut p = Json::obj().with(
        "mode",
        match r.mode {
            Mode::Exact => "exact",
            Mode::MonteCarlo => "monte-carlo",
        },
    );
    if let Some(se) = r.lhs_se {
        p = p.with("lhs_se", num(se));
    }
    if let Some(se) = r.rhs_se {
        p = p.with("rhs_se", num(se));
    }
    p = p.with("nontrivial", if r.nontrivial { "true" } else { "false" });
    for (k, v) in &r.params {
        p = p.with(k, v.as_str());
    }
    p
}

pub fn report_json(r: &IdentityReport) -> Json {
    Json::obj()
        .with("name", r.name.as_str())
        .with("lhs_re", r.lhs.re)
        .with("lhs_im", r.lhs.im)
        .with("rhs_re", r.rhs.re)
        .with("rhs_im", r.rhs.im)
        .with("abs_gap", r.abs_gap)
        .with("rel_gap", r.rel_gap)
        .with("tol", r.tol)
        .with("pass", r.pass)
        .with("seed", r.seed)
        .with("params", report_params(r))
}

pub fn verify_json(reports: &[IdentityReport], seed: u64) -> String {
    let passed = reports.iter().filter(|r| r.pass).count();
    Json::obj()
        .with("command", "verify")
        .with("seed", seed)
        .with("total", reports.len())
        .with("passed", passed)
        .with("failed", reports.len() - passed)
        .with("reports", Json::Arr(reports.iter().map(report_json).collect()))
        .render()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn verify_csv(reports: &[IdentityReport]) -> String {
    let mut out = REPORT_FIELDS[..10].join(",");
    out.push('\n');
    for r in reports {
        let row = [
            csv_field(&r.name),
            num(r.lhs.re),
            num(r.lhs.im),
            num(r.rhs.re),
            num(r.rhs.im),
            num(r.abs_gap),
            num(r.rel_gap),
            num(r.tol),
            r.pass.to_string(),
            r.seed.to_string(),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn covariance_csv(cells: &[CovarianceCell], sigmas: f64) -> String {
    let mut out = String::from("s,t,empirical,expected,se,pass\n");
    for c in cells {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            num(c.s),
            num(c.t),
            num(c.empirical),
            num(c.expected),
            num(c.se),
            c.within(sigmas)
        )
        .unwrap();
    }
    out
}

pub fn covariance_json(cells: &[CovarianceCell], sigmas: f64, header: Json) -> String {
    let rows: Vec<Json> = cells
        .iter()
        .map(|c| {
            Json::obj()
                .with("s", c.s)
                .with("t", c.t)
                .with("empirical", c.empirical)
                .with("expected", c.expected)
                .with("se", c.se)
                .with("pass", c.within(sigmas))
        })
        .collect();
    header.with("cells", Json::Arr(rows)).render()
}
