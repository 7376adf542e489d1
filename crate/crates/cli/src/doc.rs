//! Result documents: an indented key/value text form and compact JSON.

use serde_json::{Map, Value};

pub const SCHEMA: &str = "atypical-result/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Compact,
}

pub fn render(doc: &Value, format: Format) -> String {
    match format {
        Format::Compact => {
            let mut s = serde_json::to_string(doc).expect("documents are plain JSON values");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut out = String::new();
            match doc {
                Value::Object(map) => write_map(&mut out, map, 0),
                other => write_scalar_line(&mut out, other, 0),
            }
            out
        }
    }
}

fn pad(out: &mut String, depth: usize) {
    out.extend(std::iter::repeat_n(' ', 2 * depth));
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "null".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        Value::String(s) if needs_quotes(s) => serde_json::to_string(s).unwrap(),
        Value::String(s) => s.clone(),
        Value::Array(a) if a.is_empty() => "[]".into(),
        Value::Object(m) if m.is_empty() => "{}".into(),
        _ => unreachable!("containers are written by the caller"),
    }
}

fn needs_quotes(s: &str) -> bool {
    s.is_empty()
        || s.starts_with(|c: char| c.is_whitespace() || "-[{\"'#&*!|>%@`".contains(c))
        || s.ends_with(char::is_whitespace)
        || s.contains(": ")
        || s.contains(" #")
        || matches!(s, "true" | "false" | "null")
        || s.parse::<f64>().is_ok()
}

fn is_block(v: &Value) -> bool {
    matches!(v, Value::Array(a) if !a.is_empty()) || matches!(v, Value::Object(m) if !m.is_empty())
}

fn write_scalar_line(out: &mut String, v: &Value, depth: usize) {
    pad(out, depth);
    out.push_str(&scalar(v));
    out.push('\n');
}

fn write_map(out: &mut String, map: &Map<String, Value>, depth: usize) {
    for (k, v) in map {
        pad(out, depth);
        out.push_str(k);
        out.push(':');
        match v {
            Value::String(s) if s.contains('\n') => {
                out.push_str(" |\n");
                for line in s.lines() {
                    pad(out, depth + 1);
                    out.push_str(line);
                    out.push('\n');
                }
            }
            Value::Object(m) if !m.is_empty() => {
                out.push('\n');
                write_map(out, m, depth + 1);
            }
            Value::Array(a) if !a.is_empty() => {
                out.push('\n');
                write_list(out, a, depth + 1);
            }
            other => {
                out.push(' ');
                out.push_str(&scalar(other));
                out.push('\n');
            }
        }
    }
}

fn write_list(out: &mut String, items: &[Value], depth: usize) {
    for item in items {
        pad(out, depth);
        out.push('-');
        match item {
            Value::Object(m) if !m.is_empty() => {
                // First key on the dash line, the rest aligned under it.
                let mut first = String::new();
                write_map(&mut first, m, depth + 1);
                let trimmed = first.trim_start();
                out.push(' ');
                out.push_str(trimmed);
            }
            Value::Array(a) if !a.is_empty() => {
                out.push('\n');
                write_list(out, a, depth + 1);
            }
            other if is_block(other) => unreachable!(),
            other => {
                out.push(' ');
                out.push_str(&scalar(other));
                out.push('\n');
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn text_layout() {
        let doc = json!({
            "schema": SCHEMA,
            "input": "a = 1\nb = 2\n",
            "results": {"items": [{"x": "<x1 - 2>", "dim": 0}, {"x": "-1", "dim": 1}], "empty": []},
        });
        let text = render(&doc, Format::Text);
        let expected = "schema: atypical-result/1\ninput: |\n  a = 1\n  b = 2\nresults:\n  items:\n    - x: <x1 - 2>\n      dim: 0\n    - x: \"-1\"\n      dim: 1\n  empty: []\n";
        assert_eq!(text, expected);
        assert_eq!(render(&doc, Format::Compact).lines().count(), 1);
    }
}
