//! `--config file.toml` mirrors command-line flags. Top-level keys apply to
//! every subcommand, a `[subcommand]` table only to that one. Values are
//! inserted before the user's flags, so explicit flags win.

use toml::Value;

use crate::Failure;

fn flag_args(table: &toml::Table, out: &mut Vec<String>) -> Result<(), Failure> {
    for (k, v) in table {
        let flag = format!("--{}", k.replace('_', "-"));
        match v {
            Value::Table(_) => continue,
            Value::Boolean(true) => out.push(flag),
            Value::Boolean(false) => {}
            Value::String(s) => out.extend([flag, s.clone()]),
            Value::Integer(i) => out.extend([flag, i.to_string()]),
            Value::Float(f) => out.extend([flag, f.to_string()]),
            Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|x| match x {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                out.extend([flag, parts.join(",")]);
            }
            Value::Datetime(_) => return Err(Failure::usage(format!("config key {k}: dates are not supported"))),
        }
    }
    Ok(())
}

/// Returns argv with config-derived flags spliced in after the subcommand.
pub fn expand_config(argv: &[String]) -> Result<Vec<String>, Failure> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| Failure::usage("--config needs a path"))?.clone());
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a.clone());
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::usage(format!("config {path}: {e}")))?;
    let table: toml::Table = text.parse().map_err(|e| Failure::usage(format!("config {path}: {e}")))?;
    // The subcommand is the first argument that does not start with '-'.
    let Some(pos) = rest.iter().skip(1).position(|a| !a.starts_with('-')).map(|p| p + 1) else {
        return Ok(rest);
    };
    let mut extra = Vec::new();
    flag_args(&table, &mut extra)?;
    if let Some(Value::Table(sub)) = table.get(&rest[pos]) {
        flag_args(sub, &mut extra)?;
    }
    let mut out = rest[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&rest[pos + 1..]);
    Ok(out)
}
