//! Report assembly: every command fills a human transcript and a JSON body
//! side by side. Exact values are fractions, approximate ones floats, and
//! both carry an explicit marker.

use rewit::exact::format_rational;
use rewit::Rational;
use serde_json::{json, Map, Value};

pub const REPORT_VERSION: u32 = 1;

pub fn exact(q: &Rational) -> Value {
    json!({ "exact": format_rational(q) })
}

pub fn approx(x: f64) -> Value {
    json!({ "approx": x })
}

pub fn exact_vec(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(exact).collect())
}

pub fn hx(q: &Rational) -> String {
    format!("{} (exact)", format_rational(q))
}

pub fn ha(x: f64) -> String {
    format!("{x:.12e} (approx)")
}

pub fn hvec(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(format_rational).collect();
    format!("({}) (exact)", parts.join(", "))
}

pub struct Report {
    command: &'static str,
    lines: Vec<String>,
    body: Map<String, Value>,
    /// Set when a mathematical check inside the command failed.
    pub failures: Vec<String>,
    /// Replaces the whole structured output (used by `build`, whose JSON is
    /// the plain operator file).
    raw: Option<Value>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            command,
            lines: Vec::new(),
            body: Map::new(),
            failures: Vec::new(),
            raw: None,
        }
    }

    pub fn line(&mut self, s: impl Into<String>) -> &mut Self {
        self.lines.push(s.into());
        self
    }

    pub fn field(&mut self, key: &str, v: Value) -> &mut Self {
        self.body.insert(key.into(), v);
        self
    }

    pub fn raw(&mut self, v: Value) {
        self.raw = Some(v);
    }

    pub fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    pub fn human(&self) -> String {
        let mut out = self.lines.join("\n");
        for f in &self.failures {
            out.push_str(&format!("\nFAILED: {f}"));
        }
        out.push('\n');
        out
    }

    pub fn structured(&self) -> String {
        let v = match &self.raw {
            Some(v) => v.clone(),
            None => {
                let mut m = Map::new();
                m.insert("version".into(), json!(REPORT_VERSION));
                m.insert("command".into(), json!(self.command));
                m.extend(self.body.clone());
                m.insert("failures".into(), json!(self.failures));
                Value::Object(m)
            }
        };
        let mut s = serde_json::to_string_pretty(&v).expect("plain data");
        s.push('\n');
        s
    }
}
