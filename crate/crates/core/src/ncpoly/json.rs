//! Polynomial file format:
//! `{"n_parties","n_vars","var_names","degrees","terms":[{"re","im","words"}], "metadata"?}`
//! with letters as 0-based indices in product order.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::poly::{PolyBuilder, TensorPoly};
use super::word::{Letter, Word};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyJson {
    n_parties: usize,
    n_vars: usize,
    var_names: Vec<String>,
    degrees: Vec<usize>,
    terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    re: f64,
    im: f64,
    words: Vec<Vec<Letter>>,
}

/// A polynomial plus free-form metadata (provenance, fixture notes).
#[derive(Clone, Debug, PartialEq)]
pub struct PolyDocument {
    pub poly: TensorPoly,
    pub metadata: Option<Value>,
}

fn to_json_struct(p: &TensorPoly, metadata: Option<Value>) -> PolyJson {
    PolyJson {
        n_parties: p.n_parties(),
        n_vars: p.n_vars(),
        var_names: p.var_names().to_vec(),
        degrees: p.degrees().to_vec(),
        terms: p
            .terms()
            .map(|(w, c)| TermJson { re: c.re, im: c.im, words: w.iter().map(|x| x.letters().to_vec()).collect() })
            .collect(),
        metadata,
    }
}

pub fn to_value(p: &TensorPoly, metadata: Option<Value>) -> Value {
    serde_json::to_value(to_json_struct(p, metadata)).expect("polynomial JSON is always serializable")
}

pub fn serialize(p: &TensorPoly) -> Vec<u8> {
    serialize_with(p, None)
}

pub fn serialize_with(p: &TensorPoly, metadata: Option<Value>) -> Vec<u8> {
    serde_json::to_vec_pretty(&to_json_struct(p, metadata)).expect("polynomial JSON is always serializable")
}

pub fn parse(bytes: &[u8]) -> Result<TensorPoly> {
    Ok(parse_document(bytes)?.poly)
}

pub fn parse_document(bytes: &[u8]) -> Result<PolyDocument> {
    let raw: PolyJson = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        msg: e.to_string(),
        line: e.line(),
        column: e.column(),
    })?;
    from_json_struct(raw)
}

pub fn from_value(v: Value) -> Result<PolyDocument> {
    let raw: PolyJson =
        serde_json::from_value(v).map_err(|e| Error::Parse { msg: e.to_string(), line: 0, column: 0 })?;
    from_json_struct(raw)
}

fn from_json_struct(raw: PolyJson) -> Result<PolyDocument> {
    let bad = |msg: String| Error::Parse { msg, line: 0, column: 0 };
    if raw.var_names.len() != raw.n_vars {
        return Err(bad(format!("n_vars = {} but {} var_names", raw.n_vars, raw.var_names.len())));
    }
    if raw.degrees.len() != raw.n_parties {
        return Err(bad(format!("n_parties = {} but {} degrees", raw.n_parties, raw.degrees.len())));
    }
    if raw.terms.is_empty() {
        return Err(bad("polynomial has no terms (normalized form requires at least one)".into()));
    }
    let mut b = PolyBuilder::new(raw.var_names, raw.n_parties).with_degrees(raw.degrees);
    for (i, t) in raw.terms.into_iter().enumerate() {
        if t.re == 0.0 && t.im == 0.0 {
            return Err(bad(format!("terms[{i}]: zero coefficient in normalized form")));
        }
        let words = t.words.into_iter().map(Word::new).collect();
        b.add(C64::new(t.re, t.im), words).map_err(|e| bad(format!("terms[{i}]: {e}")))?;
    }
    let poly = b.finish().map_err(|e| bad(e.to_string()))?;
    Ok(PolyDocument { poly, metadata: raw.metadata })
}
