//! File formats.
//!
//! Elements: ℝ₊* as a number, U(1) as `{"theta": t}`, SU(2) as
//! `{"q": [w, x, y, z]}`, ℤ_m as an integer.
//!
//! Matrix document:
//! `{"group": tag, "n": n, "variance": "covariant"|"contravariant", "entries": [...]}`
//! with `entries` row-major and `null` for gaps. Nested rows are accepted on
//! input. ℝ₊* matrices may also be given as CSV: `n` rows of `n` positive
//! decimals.
//!
//! Complex document: `{"vertices": V, "edges": [[i, j], …], "triangles": [[i, j, k], …], "base": 0}`.
//! Field document: `{"group": tag, "values": {"i-j": element, …}}`.

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::consistencize::ConsistencizationResult;
use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::pc_matrix::{PcMatrix, Variance};
use crate::simplicial::{EdgeField, SimplicialComplex2};

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn invalid(group: Group, reason: impl Into<String>) -> Error {
    Error::InvalidElement {
        group: group.tag(),
        reason: reason.into(),
    }
}

pub fn element_to_json(e: &Element) -> Value {
    match *e {
        Element::RPlus(x) => json!(x),
        Element::U1(t) => json!({ "theta": t }),
        Element::Su2(q) => json!({ "q": q }),
        Element::ZMod { r, .. } => json!(r),
    }
}

pub fn element_from_json(group: Group, v: &Value) -> Result<Element> {
    match group {
        Group::RPlus => {
            let x = v.as_f64().ok_or_else(|| invalid(group, format!("expected a number, got {v}")))?;
            Element::rplus(x)
        }
        Group::U1 => {
            let t = v
                .get("theta")
                .and_then(Value::as_f64)
                .ok_or_else(|| invalid(group, format!("expected {{\"theta\": t}}, got {v}")))?;
            Ok(Element::u1(t))
        }
        Group::Su2 => {
            let q = v
                .get("q")
                .and_then(Value::as_array)
                .filter(|a| a.len() == 4)
                .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<f64>>>())
                .ok_or_else(|| invalid(group, format!("expected {{\"q\": [w, x, y, z]}}, got {v}")))?;
            let q = [q[0], q[1], q[2], q[3]];
            // Already-unit quaternions are kept bit-exact so documents round-trip.
            if (q.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() <= crate::group::ALGEBRA_TOL {
                Ok(Element::Su2(q))
            } else {
                Element::su2(q)
            }
        }
        Group::ZMod(m) => {
            let r = v
                .as_i64()
                .ok_or_else(|| invalid(group, format!("expected an integer, got {v}")))?;
            Element::zmod(m, r)
        }
    }
}

#[derive(Deserialize)]
struct MatrixDoc {
    group: String,
    n: usize,
    #[serde(default)]
    variance: Variance,
    entries: Vec<Value>,
}

pub fn matrix_to_json(m: &PcMatrix) -> Value {
    let entries: Vec<Value> = m
        .entries()
        .iter()
        .map(|e| e.as_ref().map_or(Value::Null, element_to_json))
        .collect();
    json!({
        "group": m.group().tag(),
        "n": m.n(),
        "variance": m.variance(),
        "entries": entries,
    })
}

/// Parses a matrix document. Shape and element domains are checked; the PC
/// axioms are not (see [`PcMatrix::validate`]).
pub fn matrix_from_json_str(s: &str) -> Result<PcMatrix> {
    let doc: MatrixDoc = serde_json::from_str(s).map_err(json_err)?;
    matrix_from_doc(doc)
}

pub fn matrix_from_json_value(v: Value) -> Result<PcMatrix> {
    let doc: MatrixDoc = serde_json::from_value(v).map_err(json_err)?;
    matrix_from_doc(doc)
}

fn matrix_from_doc(doc: MatrixDoc) -> Result<PcMatrix> {
    let group: Group = doc.group.parse()?;
    let n = doc.n;
    let flat: Vec<Value> = if doc.entries.len() == n && doc.entries.iter().all(Value::is_array) && n > 1
    {
        let mut out = Vec::with_capacity(n * n);
        for (i, row) in doc.entries.into_iter().enumerate() {
            let Value::Array(row) = row else { unreachable!() };
            if row.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            out.extend(row);
        }
        out
    } else {
        doc.entries
    };
    if flat.len() != n * n {
        return Err(Error::LengthMismatch {
            expected: n * n,
            got: flat.len(),
        });
    }
    let entries = flat
        .iter()
        .map(|v| {
            if v.is_null() {
                Ok(None)
            } else {
                element_from_json(group, v).map(Some)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    PcMatrix::from_entries(group, n, entries, doc.variance)
}

/// Parses an ℝ₊* CSV matrix.
pub fn matrix_from_csv_str(s: &str) -> Result<PcMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(s.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            column: 0,
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(rows.len() + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(c, field)| {
                let x: f64 = field.parse().map_err(|_| Error::Parse {
                    line,
                    column: c + 1,
                    message: format!("{field:?} is not a number"),
                })?;
                if !(x > 0.0 && x.is_finite()) {
                    return Err(Error::Parse {
                        line,
                        column: c + 1,
                        message: format!("{x} is not a positive real"),
                    });
                }
                Ok(x)
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty matrix".into(),
        });
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Parse {
            line: i + 1,
            column: r.len().min(n) + 1,
            message: format!("row has {} entries, expected {n}", r.len()),
        });
    }
    let entries = rows
        .into_iter()
        .flatten()
        .map(|x| Element::rplus(x).map(Some))
        .collect::<Result<Vec<_>>>()?;
    PcMatrix::from_entries(Group::RPlus, n, entries, Variance::Covariant)
}

/// Writes an ℝ₊* gap-free matrix as CSV.
pub fn matrix_to_csv(m: &PcMatrix) -> Result<String> {
    if m.group() != Group::RPlus {
        return Err(Error::RequiresRPlus("CSV output"));
    }
    let mut out = String::new();
    for i in 0..m.n() {
        let row = (0..m.n())
            .map(|j| match m.get(i, j) {
                Some(Element::RPlus(x)) => Ok(format!("{x}")),
                _ => Err(Error::GapsPresent),
            })
            .collect::<Result<Vec<_>>>()?;
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

#[derive(Deserialize)]
struct ComplexDoc {
    vertices: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    triangles: Vec<[usize; 3]>,
    #[serde(default)]
    base: usize,
}

pub fn complex_from_json_str(s: &str) -> Result<SimplicialComplex2> {
    let doc: ComplexDoc = serde_json::from_str(s).map_err(json_err)?;
    let edges: Vec<(usize, usize)> = doc.edges.iter().map(|e| (e[0], e[1])).collect();
    SimplicialComplex2::new(doc.vertices, &edges, &doc.triangles, doc.base)
}

pub fn complex_to_json(k: &SimplicialComplex2) -> Value {
    let edges: Vec<[usize; 2]> = k.edges().iter().map(|&(a, b)| [a, b]).collect();
    json!({
        "vertices": k.vertex_count(),
        "edges": edges,
        "triangles": k.triangles(),
        "base": k.base(),
    })
}

#[derive(Deserialize)]
struct FieldDoc {
    group: String,
    values: BTreeMap<String, Value>,
}

fn parse_edge_key(key: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("edge key {key:?} is not of the form \"i-j\""));
    let (a, b) = key.split_once('-').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

pub fn field_from_json_str(k: &SimplicialComplex2, s: &str) -> Result<EdgeField> {
    let doc: FieldDoc = serde_json::from_str(s).map_err(json_err)?;
    let group: Group = doc.group.parse()?;
    let mut values = BTreeMap::new();
    for (key, v) in &doc.values {
        values.insert(parse_edge_key(key)?, element_from_json(group, v)?);
    }
    EdgeField::new(k, group, &values)
}

pub fn field_to_json(k: &SimplicialComplex2, f: &EdgeField) -> Value {
    let mut values = Map::new();
    for (&(a, b), e) in k.edges().iter().zip(f.values()) {
        values.insert(format!("{a}-{b}"), element_to_json(e));
    }
    json!({ "group": f.group().tag(), "values": values })
}

pub fn consistencization_to_json(r: &ConsistencizationResult) -> Value {
    let lambda: Vec<Value> = r.gauge.as_slice().iter().map(element_to_json).collect();
    json!({
        "lambda": lambda,
        "matrix": matrix_to_json(&r.consistent),
        "residual": r.residual,
        "ii_before": r.ii_before,
        "ii_after": r.ii_after,
        "iterations": r.iterations,
        "status": r.status,
    })
}
