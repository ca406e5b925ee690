//! JSON formats for kernels, models and combs.
//!
//! A kernel is `{"dom": [{"name", "card"}...], "cod": [...], "rows": [[...]...]}` with one row
//! per domain element and one column per codomain element, both enumerated lexicographically
//! with the leftmost factor most significant. Entries are numbers or strings holding a decimal
//! (`"0.25"`) or a fraction (`"1/3"`).
//!
//! A model is `{"types": {"X": 2, ...}, "boxes": {"f": kernel, ...}}`. A comb is
//! `{"env": [...], "b": [...], "f": kernel, "g": kernel}` where `f : A -> env ⊗ b` and
//! `g : env ⊗ b' -> a'`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use markov_trace::stoch::size;
use markov_trace::{Comb, FinSet, Kernel, Model, Signature};
use serde::Deserialize;
use serde_json::Value;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{context}: {message}")]
    Invalid { context: String, message: String },
}

fn invalid(context: &str, message: impl Into<String>) -> FormatError {
    FormatError::Invalid {
        context: context.into(),
        message: message.into(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetJson {
    name: String,
    card: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelJson {
    dom: Vec<SetJson>,
    cod: Vec<SetJson>,
    rows: Vec<Vec<Value>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelJson {
    types: BTreeMap<String, usize>,
    boxes: BTreeMap<String, KernelJson>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CombJson {
    env: Vec<SetJson>,
    b: Vec<SetJson>,
    f: KernelJson,
    g: KernelJson,
}

fn entry(v: &Value, context: &str) -> Result<f64, FormatError> {
    let bad = || invalid(context, format!("entry {v} is not a number, decimal string or fraction"));
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(bad),
        Value::String(s) => {
            let s = s.trim();
            match s.split_once('/') {
                Some((p, q)) => {
                    let p: f64 = p.trim().parse().map_err(|_| bad())?;
                    let q: f64 = q.trim().parse().map_err(|_| bad())?;
                    if q == 0.0 {
                        return Err(bad());
                    }
                    Ok(p / q)
                }
                None => s.parse().map_err(|_| bad()),
            }
        }
        _ => Err(bad()),
    }
}

fn sets(js: &[SetJson], context: &str) -> Result<Vec<FinSet>, FormatError> {
    js.iter()
        .map(|s| FinSet::new(&s.name, s.card).map_err(|e| invalid(context, e.to_string())))
        .collect()
}

fn build_kernel(k: &KernelJson, context: &str) -> Result<Kernel, FormatError> {
    let dom = sets(&k.dom, context)?;
    let cod = sets(&k.cod, context)?;
    let (rows, cols) = (size(&dom), size(&cod));
    if k.rows.len() != rows {
        return Err(invalid(context, format!("expected {rows} rows, found {}", k.rows.len())));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (i, row) in k.rows.iter().enumerate() {
        if row.len() != cols {
            return Err(invalid(context, format!("row {i} has {} entries, expected {cols}", row.len())));
        }
        for v in row {
            data.push(entry(v, context)?);
        }
    }
    Kernel::new(dom, cod, data).map_err(|e| invalid(context, e.to_string()))
}

pub fn parse_kernel(text: &str) -> Result<Kernel, FormatError> {
    let k: KernelJson = serde_json::from_str(text)?;
    build_kernel(&k, "kernel")
}

/// Reads a model for `sig`. Every type and box must be covered, and nothing else mentioned.
pub fn parse_model(text: &str, sig: &Arc<Signature>) -> Result<Model, FormatError> {
    let m: ModelJson = serde_json::from_str(text)?;
    if let Some(t) = m.types.keys().find(|t| sig.type_id(t).is_none()) {
        return Err(invalid("model", format!("unknown type `{t}`")));
    }
    if let Some(b) = m.boxes.keys().find(|b| sig.box_id(b).is_none()) {
        return Err(invalid("model", format!("unknown box `{b}`")));
    }
    let cards = sig
        .types()
        .iter()
        .map(|t| {
            m.types
                .get(t)
                .copied()
                .ok_or_else(|| invalid("model", format!("no cardinality for type `{t}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let kernels = sig
        .boxes()
        .iter()
        .map(|b| {
            let k = m
                .boxes
                .get(&b.name)
                .ok_or_else(|| invalid("model", format!("no kernel for box `{}`", b.name)))?;
            let context = format!("box `{}`", b.name);
            let k = build_kernel(k, &context)?;
            // rename the factors after the signature types; cardinalities must agree
            let named = |ts: &[usize]| -> Result<Vec<FinSet>, FormatError> {
                ts.iter()
                    .map(|&t| FinSet::new(sig.type_name(t), cards[t]).map_err(|e| invalid(&context, e.to_string())))
                    .collect()
            };
            k.retype(named(&b.inputs)?, named(&b.outputs)?)
                .map_err(|_| invalid(&context, "kernel shape does not match the box signature"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Model::new(sig.clone(), cards, kernels).map_err(|e| invalid("model", e.to_string()))
}

pub fn parse_comb(text: &str) -> Result<Comb, FormatError> {
    let c: CombJson = serde_json::from_str(text)?;
    let env = sets(&c.env, "comb env")?;
    let b = sets(&c.b, "comb b")?;
    let f = build_kernel(&c.f, "comb f")?;
    let g = build_kernel(&c.g, "comb g")?;
    let tail: Vec<usize> = f.cod().iter().skip(env.len()).map(FinSet::card).collect();
    if tail != b.iter().map(FinSet::card).collect::<Vec<_>>() {
        return Err(invalid("comb", "the codomain of f must be env followed by b"));
    }
    Comb::new(env, f, g, b.len()).map_err(|e| invalid("comb", e.to_string()))
}

fn write_sets(out: &mut String, sets: &[FinSet]) {
    out.push('[');
    for (i, s) in sets.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let name = serde_json::to_string(s.name()).unwrap();
        write!(out, "{{\"name\": {name}, \"card\": {}}}", s.card()).unwrap();
    }
    out.push(']');
}

fn number(v: f64) -> String {
    serde_json::to_string(&v).unwrap()
}

fn write_kernel(out: &mut String, k: &Kernel, indent: usize) {
    let pad = " ".repeat(indent);
    out.push_str("{\n");
    write!(out, "{pad}  \"dom\": ").unwrap();
    write_sets(out, k.dom());
    write!(out, ",\n{pad}  \"cod\": ").unwrap();
    write_sets(out, k.cod());
    write!(out, ",\n{pad}  \"rows\": [").unwrap();
    for r in 0..k.rows() {
        let row: Vec<String> = k.row(r).iter().map(|&v| number(v)).collect();
        let sep = if r + 1 < k.rows() { "," } else { "" };
        write!(out, "\n{pad}    [{}]{sep}", row.join(", ")).unwrap();
    }
    write!(out, "\n{pad}  ]\n{pad}}}").unwrap();
}

/// Kernel JSON with one row per line. The output is deterministic.
pub fn kernel_to_json(k: &Kernel) -> String {
    let mut out = String::new();
    write_kernel(&mut out, k, 0);
    out.push('\n');
    out
}

/// Writes `"key": kernel` at the given indent, for use inside larger objects.
pub fn kernel_field(out: &mut String, key: &str, k: &Kernel, indent: usize) {
    write!(out, "{}\"{key}\": ", " ".repeat(indent)).unwrap();
    write_kernel(out, k, indent);
}

pub fn comb_to_json(c: &Comb) -> String {
    let mut out = String::from("{\n  \"env\": ");
    write_sets(&mut out, c.env());
    out.push_str(",\n  \"b\": ");
    write_sets(&mut out, c.b());
    out.push_str(",\n");
    kernel_field(&mut out, "f", c.first(), 2);
    out.push_str(",\n");
    kernel_field(&mut out, "g", c.second(), 2);
    out.push_str("\n}\n");
    out
}

pub fn json_number(v: f64) -> String {
    number(v)
}
