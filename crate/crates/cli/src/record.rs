use serde::Serialize;
use serde_json::{json, Map, Value};

use intertwine_core::VERSION;

/// One thresholded comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    /// `"<="`, `">="`, `">"` or `"in"`.
    pub relation: String,
    pub threshold: Value,
}

impl CheckResult {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        CheckResult {
            name: name.into(),
            pass: value <= limit,
            value,
            relation: "<=".into(),
            threshold: json!(limit),
        }
    }

    pub fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        CheckResult {
            name: name.into(),
            pass: value > limit,
            value,
            relation: ">".into(),
            threshold: json!(limit),
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        CheckResult {
            name: name.into(),
            pass: (lo..=hi).contains(&value),
            value,
            relation: "in".into(),
            threshold: json!([lo, hi]),
        }
    }

    /// Exact comparisons: passes only on zero.
    pub fn zero(name: impl Into<String>, value: f64, exact: bool, tol: f64) -> Self {
        let mut c = Self::at_most(name, value, if exact { 0.0 } else { tol });
        if exact {
            c.relation = "==".into();
        }
        c
    }
}

/// What a command hands back before it is wrapped into a [`Record`].
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub seed: Option<u64>,
    pub checks: Vec<CheckResult>,
    pub results: Value,
    /// Command-specific CSV body for `--format csv`.
    pub table: Option<String>,
    /// Parameters the command resolved itself (such as a defaulted mode),
    /// merged into the recorded parameters.
    pub resolved: Map<String, Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub command: String,
    pub version: String,
    pub params: Map<String, Value>,
    pub seed: Option<u64>,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
    pub results: Value,
    #[serde(skip)]
    table: Option<String>,
}

impl Record {
    pub fn new(command: &str, mut params: Map<String, Value>, outcome: Outcome) -> Self {
        params.extend(outcome.resolved);
        Record {
            command: command.into(),
            version: VERSION.into(),
            params,
            seed: outcome.seed,
            pass: outcome.checks.iter().all(|c| c.pass),
            checks: outcome.checks,
            results: outcome.results,
            table: outcome.table,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records serialize");
        s.push('\n');
        s
    }

    /// The command's table, preceded by `#` lines carrying the command,
    /// version, seed, parameters and check verdicts.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# intertwine {} {}\n", self.version, self.command);
        out.push_str(&format!("# params {}\n", Value::Object(self.params.clone())));
        if let Some(seed) = self.seed {
            out.push_str(&format!("# seed {seed}\n"));
        }
        for c in &self.checks {
            out.push_str(&format!(
                "# check {} {} {:e} {} {}\n",
                c.name,
                if c.pass { "pass" } else { "fail" },
                c.value,
                c.relation,
                c.threshold
            ));
        }
        match &self.table {
            Some(t) => out.push_str(t),
            None => {
                out.push_str("check,pass,value,relation,threshold\n");
                for c in &self.checks {
                    out.push_str(&format!(
                        "{},{},{},{},\"{}\"\n",
                        c.name, c.pass, c.value, c.relation, c.threshold
                    ));
                }
            }
        }
        out
    }

    pub fn failure_report(&self) -> String {
        let failed: Vec<&CheckResult> = self.checks.iter().filter(|c| !c.pass).collect();
        json!({
            "status": "check-failed",
            "command": self.command,
            "version": self.version,
            "params": self.params,
            "seed": self.seed,
            "failed": failed,
        })
        .to_string()
    }
}

pub(crate) fn error_report(command: &str, params: &Map<String, Value>, error: &intertwine_core::Error) -> String {
    json!({
        "status": "error",
        "command": command,
        "version": VERSION,
        "params": params,
        "error": error.to_string(),
    })
    .to_string()
}
