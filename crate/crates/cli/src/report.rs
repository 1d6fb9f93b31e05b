//! Report emission: pretty JSON, or a flat key/value table.

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Table,
}

pub fn render<T: Serialize>(report: &T, format: Format) -> CliResult<String> {
    let json_err = |source| CliError::Json { what: "report".into(), source };
    Ok(match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(json_err)?;
            s.push('\n');
            s
        }
        Format::Table => table(&serde_json::to_value(report).map_err(json_err)?),
    })
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.6}"),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn is_flat(items: &[Value]) -> bool {
    items.iter().all(|v| !v.is_array() && !v.is_object())
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        Value::Array(items) if is_flat(items) => {
            let row: Vec<String> = items.iter().map(scalar).collect();
            out.push((prefix.to_string(), format!("[{}]", row.join(" "))));
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), child, out);
            }
        }
        leaf => out.push((prefix.to_string(), scalar(leaf))),
    }
}

/// One `key  value` line per leaf; flat arrays stay on one line.
pub fn table(v: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn table_layout() {
        let v = json!({"value": 0.5, "n": 2, "a": [[0.5, 1], [0, 0.5]], "ok": true, "w": null});
        let t = table(&v);
        assert!(t.contains("a[0]   [0.500000 1]\n"));
        assert!(t.contains("n      2\n"));
        assert!(t.contains("ok     true\n"));
        assert!(t.contains("w      -\n"));
    }

    #[test]
    fn json_ends_with_newline() {
        let s = render(&json!({"x": 1}), Format::Json).unwrap();
        assert_eq!(s, "{\n  \"x\": 1\n}\n");
    }
}
