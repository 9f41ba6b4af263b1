//! Deterministic JSON and CSV output.
//!
//! JSON objects keep insertion order and floats are printed with 17
//! significant digits in scientific notation, so identical inputs give
//! byte-identical reports. Non-finite floats become `null`.

use std::fmt::{self, Write as _};

use crate::collision::ClearanceReport;
use crate::geometry::{PlacedTable, Pose, TableSpec, Vec3};
use crate::solver::{BalanceReport, SweepRow};

#[derive(Clone, Debug, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Num(f64),
    Int(i64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

/// Float with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Json {
    pub fn obj() -> Self {
        Json::Obj(Vec::new())
    }

    /// Appends a key; panics on non-objects.
    pub fn with(mut self, key: &str, value: impl Into<Json>) -> Self {
        match &mut self {
            Json::Obj(fields) => fields.push((key.to_string(), value.into())),
            _ => panic!("with() on a non-object"),
        }
        self
    }

    fn write(&self, out: &mut String, indent: usize) -> fmt::Result {
        let pad = |out: &mut String, n: usize| out.push_str(&"  ".repeat(n));
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => write!(out, "{b}")?,
            Json::Num(x) if x.is_finite() => out.push_str(&fmt_float(*x)),
            Json::Num(_) => out.push_str("null"),
            Json::Int(i) => write!(out, "{i}")?,
            Json::Str(s) => write_str(out, s)?,
            Json::Arr(items) if items.iter().all(Json::is_scalar) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    item.write(out, indent)?;
                }
                out.push(']');
            }
            Json::Arr(items) => {
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    pad(out, indent + 1);
                    item.write(out, indent + 1)?;
                    out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
                }
                pad(out, indent);
                out.push(']');
            }
            Json::Obj(fields) if fields.is_empty() => out.push_str("{}"),
            Json::Obj(fields) => {
                out.push_str("{\n");
                for (i, (k, v)) in fields.iter().enumerate() {
                    pad(out, indent + 1);
                    write_str(out, k)?;
                    out.push_str(": ");
                    v.write(out, indent + 1)?;
                    out.push_str(if i + 1 < fields.len() { ",\n" } else { "\n" });
                }
                pad(out, indent);
                out.push('}');
            }
        }
        Ok(())
    }

    fn is_scalar(&self) -> bool {
        !matches!(self, Json::Arr(_) | Json::Obj(_))
    }
}

fn write_str(out: &mut String, s: &str) -> fmt::Result {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => write!(out, "\\u{:04x}", c as u32)?,
            c => out.push(c),
        }
    }
    out.push('"');
    Ok(())
}

impl fmt::Display for Json {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s, 0)?;
        f.write_str(&s)
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

impl From<usize> for Json {
    fn from(n: usize) -> Self {
        Json::Int(n as i64)
    }
}

impl From<u64> for Json {
    fn from(n: u64) -> Self {
        Json::Int(n as i64)
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

impl From<&Vec3> for Json {
    fn from(v: &Vec3) -> Self {
        Json::Arr(vec![v.x.into(), v.y.into(), v.z.into()])
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

pub fn pose_json(p: &Pose) -> Json {
    Json::obj()
        .with("gamma", p.azimuth)
        .with("t", p.diag_param)
        .with("theta", p.tilt)
}

pub fn table_json(t: &PlacedTable) -> Json {
    Json::obj()
        .with("A", &t.a)
        .with("B", &t.b)
        .with("C", &t.c)
        .with("D", &t.d)
        .with("phi", t.incline())
}

pub fn spec_json(s: &TableSpec) -> Json {
    Json::obj()
        .with("ratio", s.ratio())
        .with("legs", s.leg_length())
        .with("half_angle", s.half_angle())
}

pub fn balance_json(r: &BalanceReport) -> Json {
    Json::obj()
        .with("status", r.status.as_str())
        .with("pose", r.pose.as_ref().map(pose_json))
        .with("table", r.table.as_ref().map(table_json))
        .with("residuals", r.residuals.to_vec())
        .with("max_residual", r.max_residual())
        .with("center_z", r.center_z)
        .with("sweep_samples", r.sweep_samples)
        .with("bisection_iters", r.bisection_iters)
        .with("min_abs_hover", r.min_abs_hover)
        .with("argmin_gamma", r.argmin_gamma)
        .with("warnings", r.warnings.clone())
}

pub fn clearance_json(c: &ClearanceReport) -> Json {
    Json::obj()
        .with("pass", c.pass)
        .with("min_leg_clearance", c.min_leg_clearance)
        .with("min_top_clearance", c.min_top_clearance)
        .with("certificate_pass", c.certificate_pass)
        .with("worst_point", &c.worst_point)
        .with("samples", c.samples)
}

pub const SWEEP_HEADER: [&str; 6] = ["gamma", "t", "phi", "theta", "hover", "center_z"];

fn csv_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        fmt_float(x)
    }
}

/// Sweep rows as CSV with header `gamma,t,phi,theta,hover,center_z` and LF
/// line endings. Unsolved fields are written as `nan`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record(
            [
                r.gamma,
                r.diag_param,
                r.incline,
                r.tilt,
                r.hover,
                r.center_z,
            ]
            .map(csv_float),
        )
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}
