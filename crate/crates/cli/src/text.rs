//! Indented plain-text rendering of JSON reports.

use serde_json::Value;

pub fn render(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out
}

fn scalar(value: &Value) -> Option<String> {
    match value {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) if items.is_empty() => Some("[]".into()),
        Value::Array(items) if items.iter().all(|v| !v.is_object() && !v.is_array()) => Some(
            items
                .iter()
                .map(|v| scalar(v).unwrap_or_default())
                .collect::<Vec<_>>()
                .join(", "),
        ),
        Value::Array(items) if items.iter().all(is_flat_array) => Some(
            items
                .iter()
                .map(|v| format!("[{}]", scalar(v).unwrap_or_default()))
                .collect::<Vec<_>>()
                .join(" "),
        ),
        _ => None,
    }
}

fn is_flat_array(value: &Value) -> bool {
    matches!(value, Value::Array(items) if items.iter().all(|v| !v.is_object() && !v.is_array()))
}

fn write_value(out: &mut String, value: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (key, v) in map {
                match scalar(v) {
                    Some(s) => out.push_str(&format!("{pad}{key}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{key}:\n"));
                        write_value(out, v, indent + 1);
                    }
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match scalar(item) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}-\n"));
                        write_value(out, item, indent + 1);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}
