//! Run reports: JSON or `key = value` text.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Config;

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub config: Config,
    pub warnings: Vec<String>,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_seconds: Option<f64>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are finite or null");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command = {}", self.command);
        render(&mut out, "", &self.result);
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        if let Some(t) = self.timing_seconds {
            let _ = writeln!(out, "timing_seconds = {t}");
        }
        out
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn inline(v: &Value) -> Option<String> {
    match v {
        Value::Array(items) if items.iter().all(is_scalar) => Some(format!(
            "[{}]",
            items
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        )),
        v if is_scalar(v) => Some(match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }),
        _ => None,
    }
}

fn render(out: &mut String, prefix: &str, v: &Value) {
    if let Some(s) = inline(v) {
        let _ = writeln!(out, "{prefix} = {s}");
        return;
    }
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                render(out, &key(k), x);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                render(out, &format!("{prefix}[{}]", i + 1), x);
            }
        }
        _ => unreachable!(),
    }
}

/// Non-finite numbers become `null`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub fn real_matrix(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| num(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn complex_matrix(m: &DMatrix<Complex64>) -> Value {
    json!({
        "re": real_matrix(&m.map(|z| z.re)),
        "im": real_matrix(&m.map(|z| z.im)),
    })
}

pub fn vector(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_rendering() {
        let report = RunReport {
            command: "spectrum",
            config: Config::from_spec(&junction_core::builtin_example()),
            warnings: vec!["careful".into()],
            result: json!({"band": [4.0, 16.0], "groups": [{"lambda": 5.0}], "name": "x"}),
            timing_seconds: None,
        };
        let text = report.to_text();
        assert!(text.contains("band = [4.0, 16.0]\n"));
        assert!(text.contains("groups[1].lambda = 5.0\n"));
        assert!(text.contains("name = x\n"));
        assert!(text.ends_with("warning: careful\n"));
        assert!(!report.to_json().contains("timing"));
    }

    #[test]
    fn nonfinite_is_null() {
        assert_eq!(num(f64::NAN), Value::Null);
        assert_eq!(vector(&[1.0, f64::INFINITY]), json!([1.0, null]));
    }
}
