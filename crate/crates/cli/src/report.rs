use std::fmt::Write as _;
use std::path::Path;

use mfdb::io::{format_number, IoError};
use serde_json::{Map, Value};

/// Flat list of named results, rendered as `key = value` lines or JSON.
#[derive(Debug, Default)]
pub struct Report {
    entries: Vec<(String, Value)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(&mut self, key: &str, v: f64) -> &mut Self {
        let value = serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null);
        self.entries.push((key.into(), value));
        self
    }

    pub fn int(&mut self, key: &str, v: u64) -> &mut Self {
        self.entries.push((key.into(), Value::from(v)));
        self
    }

    pub fn text(&mut self, key: &str, v: &str) -> &mut Self {
        self.entries.push((key.into(), Value::from(v)));
        self
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let map: Map<String, Value> = self.entries.iter().cloned().collect();
            let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("plain values serialize");
            s.push('\n');
            return s;
        }
        let mut s = String::new();
        for (k, v) in &self.entries {
            let shown = match v {
                Value::Number(n) if n.is_f64() => format_number(n.as_f64().expect("f64")),
                Value::String(t) => t.clone(),
                Value::Null => "NaN".into(),
                other => other.to_string(),
            };
            writeln!(s, "{k} = {shown}").expect("write to string");
        }
        s
    }

    pub fn save(&self, path: &Path, json: bool) -> Result<(), IoError> {
        std::fs::write(path, self.render(json)).map_err(|source| IoError::File {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_json() {
        let mut r = Report::new();
        r.num("p", 2.0).num("e_a", 0.17647058823529413).int("n", 3).text("kind", "database");
        assert_eq!(r.render(false), "p = 2\ne_a = 0.176470588235\nn = 3\nkind = database\n");
        let v: Value = serde_json::from_str(&r.render(true)).unwrap();
        assert_eq!(v["n"], 3);
        assert_eq!(v["e_a"].as_f64().unwrap(), 0.17647058823529413);
    }

    #[test]
    fn non_finite_is_null_in_json() {
        let mut r = Report::new();
        r.num("x", f64::NAN);
        assert_eq!(r.render(false), "x = NaN\n");
        assert!(r.render(true).contains("null"));
    }
}
