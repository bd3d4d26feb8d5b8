//! Program documents:
//! `{"format":"tempoly-program","n_parties":n,"var_names":[..],"dt":x?,
//!   "segments":[{"kind":"poly","branching":"canonical","poly":{..}},
//!               {"kind":"free","steps":s}, ..]}`
//! where `poly` is a polynomial or expression document.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::sim::{Branching, ProtocolProgram, Segment};
use crate::error::{Error, Result};
use crate::ncpoly::{expr_from_value, expr_to_value, is_expr_document, json, PolyExpr};

pub const PROGRAM_FORMAT: &str = "tempoly-program";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProgramJson {
    format: String,
    n_parties: usize,
    var_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    segments: Vec<SegmentJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SegmentJson {
    Poly {
        #[serde(default)]
        branching: Branching,
        poly: Value,
    },
    Free {
        steps: usize,
    },
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse { msg: msg.into(), line: 0, column: 0 }
}

pub fn program_to_value(p: &ProtocolProgram, metadata: Option<Value>) -> Value {
    let segments = p
        .segments
        .iter()
        .map(|s| match s {
            Segment::Poly { poly, branching } => SegmentJson::Poly {
                branching: *branching,
                poly: match poly.as_leaf() {
                    Some(leaf) => json::to_value(leaf, None),
                    None => expr_to_value(poly, None),
                },
            },
            Segment::Free { steps } => SegmentJson::Free { steps: *steps },
        })
        .collect();
    let doc = ProgramJson {
        format: PROGRAM_FORMAT.into(),
        n_parties: p.n_parties,
        var_names: p.var_names.clone(),
        dt: p.dt,
        segments,
        metadata,
    };
    serde_json::to_value(doc).expect("program JSON is serializable")
}

pub fn program_from_value(v: Value) -> Result<(ProtocolProgram, Option<Value>)> {
    let doc: ProgramJson = serde_json::from_value(v).map_err(|e| parse_err(e.to_string()))?;
    if doc.format != PROGRAM_FORMAT {
        return Err(parse_err(format!("unknown format {:?}", doc.format)));
    }
    let segments = doc
        .segments
        .into_iter()
        .map(|s| match s {
            SegmentJson::Free { steps } => Ok(Segment::Free { steps }),
            SegmentJson::Poly { branching, poly } => {
                let e = if is_expr_document(&poly) {
                    expr_from_value(poly)?.0
                } else {
                    PolyExpr::leaf(json::from_value(poly)?.poly)
                };
                Ok(Segment::Poly { poly: e, branching })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut prog = ProtocolProgram::new(doc.n_parties, doc.var_names, segments)?;
    if let Some(dt) = doc.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Invalid(format!("dt must be positive, got {dt}")));
        }
        prog = prog.with_dt(dt);
    }
    Ok((prog, doc.metadata))
}
