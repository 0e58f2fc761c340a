//! Document writer: pretty JSON with every float printed to 17 significant
//! digits, so that parsing the text back yields the same bits.

use serde::Serialize;
use serde_json::Value;

use crate::error::{GyroError, Result};

/// `x` as `d.dddddddddddddddde±x`, or `null` if not finite.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn is_flat(items: &[Value]) -> bool {
    items.iter().all(|v| !matches!(v, Value::Array(_) | Value::Object(_)))
}

fn write(v: &Value, indent: usize, out: &mut String) {
    let pad = |k: usize| "  ".repeat(k);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => out.push_str(&u.to_string()),
            (None, Some(i)) => out.push_str(&i.to_string()),
            _ => out.push_str(&fmt_f64(n.as_f64().unwrap_or(f64::NAN))),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if is_flat(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write(x, indent, out);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write(x, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(k).expect("keys serialize"));
                out.push_str(": ");
                write(x, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Serializes `doc` in the document style, with a trailing newline.
pub fn to_document_string<T: Serialize>(doc: &T) -> Result<String> {
    let value = serde_json::to_value(doc).map_err(|e| GyroError::ParseError(e.to_string()))?;
    let mut out = String::new();
    write(&value, 0, &mut out);
    out.push('\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_roundtrip_bitwise() {
        let xs = vec![std::f64::consts::E, 0.1, -1e-300, 123456789.0, 5e-324, f64::MAX];
        let text = to_document_string(&xs).unwrap();
        assert!(text.contains("2.7182818284590451e0"));
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        for (a, b) in xs.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn integers_and_nulls() {
        let v = serde_json::json!({"n": 3, "x": null, "ok": true, "rows": [[1.5], [2.5]]});
        let text = to_document_string(&v).unwrap();
        assert!(text.contains("\"n\": 3"));
        assert!(text.contains("\"x\": null"));
        assert!(text.contains("[1.5000000000000000e0]"));
    }
}
