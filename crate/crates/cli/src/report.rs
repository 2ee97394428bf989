//! Versioned reports: a config echo, claim verdicts and command data.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::args::Format;
use crate::config::{config_err, Failure, Outcome};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Informational; never affects the exit status.
    Report,
}

#[derive(Clone, Debug, Serialize)]
pub struct Claim {
    pub label: String,
    pub statement: String,
    pub status: Status,
    pub detail: String,
}

impl Claim {
    pub fn check(label: &str, statement: &str, ok: bool, detail: String) -> Claim {
        Claim {
            label: label.into(),
            statement: statement.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail,
        }
    }

    pub fn report(label: &str, statement: &str, detail: String) -> Claim {
        Claim {
            label: label.into(),
            statement: statement.into(),
            status: Status::Report,
            detail,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: Value,
    pub claims: Vec<Claim>,
    pub data: Value,
    #[serde(skip)]
    pub text: String,
    #[serde(skip)]
    pub latex: Option<String>,
}

impl Report {
    pub fn new(command: &str, config: impl Serialize) -> Report {
        Report {
            schema: SCHEMA,
            tool: "casimir",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            seed: 0,
            config: serde_json::to_value(config).expect("config serializes"),
            claims: Vec::new(),
            data: Value::Null,
            text: String::new(),
            latex: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.status != Status::Fail)
    }

    pub fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    pub fn render(&self, format: Format) -> Outcome<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self).expect("report serializes") + "\n"),
            Format::Latex => match &self.latex {
                Some(l) => Ok(l.clone()),
                None => config_err(format!("`{}` has no LaTeX output", self.command)),
            },
            Format::Text => {
                let mut out = String::new();
                let _ = writeln!(out, "casimir {} ({})", self.command, self.version);
                if let Value::Object(m) = &self.config {
                    let cfg: Vec<String> = m.iter().map(|(k, v)| format!("{k}={}", compact(v))).collect();
                    let _ = writeln!(out, "config: {} seed={}", cfg.join(" "), self.seed);
                }
                out.push('\n');
                out.push_str(&self.text);
                if !self.claims.is_empty() {
                    out.push('\n');
                    for c in &self.claims {
                        let tag = match c.status {
                            Status::Pass => "PASS",
                            Status::Fail => "FAIL",
                            Status::Report => "INFO",
                        };
                        let _ = writeln!(out, "[{tag}] {}: {}", c.label, c.statement);
                        if !c.detail.is_empty() {
                            let _ = writeln!(out, "       {}", c.detail);
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> Outcome<()> {
        let s = self.render(format)?;
        match out {
            Some(p) => std::fs::write(p, s).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display()))),
            None => {
                print!("{s}");
                Ok(())
            }
        }
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

/// `w^2 + 2*n*w` → `w^{2} + 2 n w` for tables.
pub fn coeff_latex(s: &str) -> String {
    let mut out = String::new();
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '*' => out.push(' '),
            '^' => {
                let mut exp = String::new();
                while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    exp.push(*d);
                    chars.next();
                }
                let _ = write!(out, "^{{{exp}}}");
            }
            _ => out.push(c),
        }
    }
    out
}

/// Slot variable names as LaTeX symbols.
pub fn slot_latex(name: &str) -> String {
    match name {
        "sigma" | "alpha" | "beta" | "mu" | "nu" | "rho" | "tau" | "Phi" => format!("\\{name}"),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greek_slots() {
        assert_eq!(slot_latex("sigma"), "\\sigma");
        assert_eq!(slot_latex("A"), "A");
    }

    #[test]
    fn latex_coefficients() {
        assert_eq!(coeff_latex("w^2 + 2*n*w"), "w^{2} + 2 n w");
        assert_eq!(coeff_latex("-3"), "-3");
    }

    #[test]
    fn verdict_ignores_reports() {
        let mut r = Report::new("x", serde_json::json!({}));
        r.claims.push(Claim::report("a", "b", String::new()));
        assert!(r.passed());
        r.claims.push(Claim::check("c", "d", false, String::new()));
        assert!(!r.passed());
    }

    #[test]
    fn latex_unavailable_is_config_error() {
        let r = Report::new("verify", serde_json::json!({}));
        assert!(matches!(r.render(Format::Latex), Err(Failure::Config(_))));
    }
}
