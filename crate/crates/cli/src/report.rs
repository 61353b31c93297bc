//! Machine-readable run reports.

use serde::Serialize;

use crate::config::RunConfig;

/// One checked quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub detail: String,
}

impl CheckRow {
    pub fn new(name: impl Into<String>, value: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            value,
            reference: None,
            tolerance: None,
            pass,
            detail: String::new(),
        }
    }

    pub fn reference(mut self, r: f64) -> Self {
        self.reference = Some(r);
        self
    }

    pub fn tolerance(mut self, t: f64) -> Self {
        self.tolerance = Some(t);
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }
}

/// Report of one command. Fields serialize in declaration order; wall-clock
/// timing goes to stderr so that reports stay reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: RunConfig,
    pub checks: Vec<CheckRow>,
    pub data: serde_json::Value,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            command: command.to_string(),
            config: config.clone(),
            checks: Vec::new(),
            data: serde_json::Value::Null,
            warnings: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Result<Vec<u8>, serde_json::Error> {
        let mut v = serde_json::to_vec_pretty(self)?;
        v.push(b'\n');
        Ok(v)
    }

    /// Aligned plain-text table of the checks.
    pub fn table(&self) -> String {
        let name_w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(5);
        let mut s = format!("{:<name_w$}  {:>14}  {:>14}  {:>10}  {}\n", "check", "value", "reference", "result", "detail");
        for c in &self.checks {
            let reference = c.reference.map(|r| format!("{r:.6e}")).unwrap_or_else(|| "-".into());
            s.push_str(&format!(
                "{:<name_w$}  {:>14.6e}  {:>14}  {:>10}  {}\n",
                c.name,
                c.value,
                reference,
                if c.pass { "PASS" } else { "FAIL" },
                c.detail
            ));
        }
        for w in &self.warnings {
            s.push_str(&format!("warning: {w}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_echo_reparses() {
        let mut cfg = RunConfig::default();
        cfg.seed = 17;
        cfg.epsilon = vec![0.05];
        let mut r = RunReport::new("scan", &cfg);
        r.checks.push(CheckRow::new("x", 1.0, true).reference(1.0));
        let bytes = r.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        let back: RunConfig = serde_json::from_value(v["config"].clone()).unwrap();
        assert_eq!(back, cfg);
        let text = String::from_utf8(bytes).unwrap();
        let pos: Vec<usize> = ["\n  \"command\"", "\n  \"config\"", "\n  \"checks\"", "\n  \"data\"", "\n  \"warnings\""]
            .iter()
            .map(|k| text.find(k).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{pos:?}");
    }

    #[test]
    fn table_marks_failures() {
        let mut r = RunReport::new("verify", &RunConfig::default());
        r.checks.push(CheckRow::new("a", 0.5, false).detail("too big"));
        let t = r.table();
        assert!(t.contains("FAIL") && t.contains("too big"));
        assert!(!r.all_pass());
    }
}
