//! Experiment reports: raw statistics, baselines with provenance, and
//! per-criterion verdicts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

/// Version tag carried by every JSON artifact.
pub const SCHEMA: &str = "strata-forge/1";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// low ≤ observed ≤ high
    Between { low: f64, high: f64 },
    /// |observed − baseline| ≤ tolerance
    AbsDiffAtMost,
    /// observed > baseline
    GreaterThan,
    /// observed ≥ baseline
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    pub observed: f64,
    pub baseline: f64,
    pub baseline_source: String,
    pub relation: Relation,
    pub tolerance: f64,
    /// Unenforced comparisons are reported but never fail the report.
    pub enforced: bool,
    pub pass: bool,
}

impl Comparison {
    pub fn new(
        name: impl Into<String>,
        observed: f64,
        baseline: f64,
        baseline_source: impl Into<String>,
        relation: Relation,
        tolerance: f64,
    ) -> Self {
        let pass = match relation {
            Relation::AbsDiffAtMost => (observed - baseline).abs() <= tolerance,
            Relation::GreaterThan => observed > baseline,
            Relation::AtLeast => observed >= baseline,
            Relation::Between { low, high } => (low..=high).contains(&observed),
        };
        Comparison {
            name: name.into(),
            observed,
            baseline,
            baseline_source: baseline_source.into(),
            relation,
            tolerance,
            enforced: true,
            pass,
        }
    }

    pub fn unenforced(mut self) -> Self {
        self.enforced = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub experiment: String,
    pub parameters: Value,
    pub sample_sizes: BTreeMap<String, u64>,
    pub observed: Value,
    pub comparisons: Vec<Comparison>,
    #[serde(default)]
    pub witness: Option<Value>,
    #[serde(default)]
    pub notes: Vec<String>,
    pub seed: Option<u64>,
    pub runtime_ms: u64,
}

impl ExperimentReport {
    pub fn new(experiment: &str, parameters: Value) -> Self {
        ExperimentReport {
            schema: SCHEMA.to_string(),
            experiment: experiment.to_string(),
            parameters,
            sample_sizes: BTreeMap::new(),
            observed: Value::Null,
            comparisons: Vec::new(),
            witness: None,
            notes: Vec::new(),
            seed: None,
            runtime_ms: 0,
        }
    }

    /// All enforced comparisons pass.
    pub fn passed(&self) -> bool {
        self.comparisons.iter().filter(|c| c.enforced).all(|c| c.pass)
    }

    pub fn comparison(&self, name: &str) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.name == name)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Plain-text summary.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "{} [{}] {verdict}", self.experiment, self.schema);
        let _ = writeln!(s, "  parameters: {}", self.parameters);
        for (k, v) in &self.sample_sizes {
            let _ = writeln!(s, "  {k}: {v}");
        }
        if !self.observed.is_null() {
            let _ = writeln!(s, "  observed: {}", self.observed);
        }
        for c in &self.comparisons {
            let rel = match c.relation {
                Relation::AbsDiffAtMost => format!("|obs - base| <= {}", c.tolerance),
                Relation::GreaterThan => "obs > base".to_string(),
                Relation::AtLeast => "obs >= base".to_string(),
                Relation::Between { low, high } => format!("{low:.6} <= obs <= {high:.6}"),
            };
            let status = match (c.enforced, c.pass) {
                (false, _) => "info",
                (true, true) => "pass",
                (true, false) => "fail",
            };
            let _ = writeln!(
                s,
                "  [{status}] {}: observed {:.6}, baseline {:.6} ({}), {rel}",
                c.name, c.observed, c.baseline, c.baseline_source
            );
        }
        if let Some(w) = &self.witness {
            let _ = writeln!(s, "  witness: {w}");
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "  seed: {seed}");
        }
        let _ = writeln!(s, "  runtime: {} ms", self.runtime_ms);
        s
    }
}
