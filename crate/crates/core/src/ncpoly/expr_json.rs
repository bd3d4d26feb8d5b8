//! Composition-tree JSON for [`PolyExpr`]. Shared subtrees are written once:
//! `nodes` is a topologically sorted list (children first) and nodes refer
//! to each other by index.

use std::collections::HashMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::expr::{Kind, PolyExpr};
use super::json;
use crate::error::{Error, Result};

pub const EXPR_FORMAT: &str = "tempoly-expr";

#[derive(Serialize, Deserialize)]
struct ExprJson {
    format: String,
    var_names: Vec<String>,
    degrees: Vec<usize>,
    nodes: Vec<NodeJson>,
    root: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum NodeJson {
    Leaf { poly: Value },
    Product { children: Vec<usize> },
    Sum { children: Vec<usize> },
    Scalar { re: f64, im: f64, child: usize },
    TensorEmbed { child: usize, n_total: usize, targets: Vec<usize>, filler: Option<Value> },
    Substitute { outer: Value, args: Vec<usize> },
}

pub fn expr_to_value(e: &PolyExpr, metadata: Option<Value>) -> Value {
    let mut nodes = Vec::new();
    let mut index = HashMap::new();
    let root = emit(e, &mut nodes, &mut index);
    let doc = ExprJson {
        format: EXPR_FORMAT.into(),
        var_names: e.var_names().to_vec(),
        degrees: e.degrees().to_vec(),
        nodes,
        root,
        metadata,
    };
    serde_json::to_value(doc).expect("expression JSON is serializable")
}

fn emit(e: &PolyExpr, nodes: &mut Vec<NodeJson>, index: &mut HashMap<usize, usize>) -> usize {
    let key = e.node() as *const _ as usize;
    if let Some(&i) = index.get(&key) {
        return i;
    }
    let node = match e.kind() {
        Kind::Leaf(p) => NodeJson::Leaf { poly: json::to_value(p, None) },
        Kind::Product(fs) => NodeJson::Product { children: fs.iter().map(|f| emit(f, nodes, index)).collect() },
        Kind::Sum(ps) => NodeJson::Sum { children: ps.iter().map(|f| emit(f, nodes, index)).collect() },
        Kind::Scalar { c, child } => NodeJson::Scalar { re: c.re, im: c.im, child: emit(child, nodes, index) },
        Kind::Embed { child, n_total, targets, filler } => NodeJson::TensorEmbed {
            child: emit(child, nodes, index),
            n_total: *n_total,
            targets: targets.clone(),
            filler: filler.as_ref().map(|f| json::to_value(f, None)),
        },
        Kind::Substitute { outer, args } => NodeJson::Substitute {
            outer: json::to_value(outer, None),
            args: args.iter().map(|a| emit(a, nodes, index)).collect(),
        },
    };
    nodes.push(node);
    let i = nodes.len() - 1;
    index.insert(key, i);
    i
}

pub fn is_expr_document(v: &Value) -> bool {
    v.get("format").and_then(Value::as_str) == Some(EXPR_FORMAT)
}

pub fn expr_from_value(v: Value) -> Result<(PolyExpr, Option<Value>)> {
    let doc: ExprJson =
        serde_json::from_value(v).map_err(|e| Error::Parse { msg: e.to_string(), line: 0, column: 0 })?;
    if doc.format != EXPR_FORMAT {
        return Err(Error::Parse { msg: format!("unknown format {:?}", doc.format), line: 0, column: 0 });
    }
    let mut built: Vec<PolyExpr> = Vec::with_capacity(doc.nodes.len());
    let get = |built: &Vec<PolyExpr>, i: usize, at: usize| -> Result<PolyExpr> {
        if i >= at {
            return Err(Error::Parse { msg: format!("node {at} refers forward to {i}"), line: 0, column: 0 });
        }
        Ok(built[i].clone())
    };
    for (at, n) in doc.nodes.into_iter().enumerate() {
        let e = match n {
            NodeJson::Leaf { poly } => PolyExpr::leaf(json::from_value(poly)?.poly),
            NodeJson::Product { children } => {
                PolyExpr::product(children.iter().map(|&i| get(&built, i, at)).collect::<Result<_>>()?)?
            }
            NodeJson::Sum { children } => {
                PolyExpr::sum(children.iter().map(|&i| get(&built, i, at)).collect::<Result<_>>()?)?
            }
            NodeJson::Scalar { re, im, child } => PolyExpr::scalar(C64::new(re, im), get(&built, child, at)?),
            NodeJson::TensorEmbed { child, n_total, targets, filler } => {
                let filler = filler.map(|f| json::from_value(f).map(|d| d.poly)).transpose()?;
                PolyExpr::tensor_embed(get(&built, child, at)?, n_total, &targets, filler)?
            }
            NodeJson::Substitute { outer, args } => PolyExpr::compose(
                json::from_value(outer)?.poly,
                args.iter().map(|&i| get(&built, i, at)).collect::<Result<_>>()?,
            )?,
        };
        built.push(e);
    }
    let root = built.get(doc.root).cloned().ok_or_else(|| Error::Parse {
        msg: "root index out of range".into(),
        line: 0,
        column: 0,
    })?;
    Ok((root, doc.metadata))
}

/// Loads either a plain polynomial document or an expression document.
pub fn load_any(bytes: &[u8]) -> Result<(PolyExpr, Option<Value>)> {
    let v: Value = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        msg: e.to_string(),
        line: e.line(),
        column: e.column(),
    })?;
    if is_expr_document(&v) {
        expr_from_value(v)
    } else {
        let doc = json::parse_document(bytes)?;
        Ok((PolyExpr::leaf(doc.poly), doc.metadata))
    }
}
