use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ExperimentConfig;
use super::runner::Outcome;
use crate::measures::PotentialComparison;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `value ≤ threshold`
    AtMost,
    /// `value < threshold`
    Below,
    /// `value ≥ threshold`
    AtLeast,
    /// `value > threshold`
    Above,
}

impl Relation {
    fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Relation::AtMost => value <= threshold,
            Relation::Below => value < threshold,
            Relation::AtLeast => value >= threshold,
            Relation::Above => value > threshold,
        }
    }
}

/// One thresholded statement entering the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation,
            threshold,
            passed: relation.holds(value, threshold),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// Position in the sorted record list; the `trial` column of CSV dumps.
    pub index: usize,
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub ensemble: String,
    pub seed_rule: String,
    pub version: String,
}

/// Bulk per-trial data written as CSV; `trial` is the record index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dumps {
    pub eigenvalues: Vec<(usize, usize, Complex64)>,
    pub singulars: Vec<(usize, usize, f64)>,
    pub distances: Vec<(usize, usize, f64)>,
    pub potentials: Vec<PotentialComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub summary: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub violations: usize,
    pub excluded: Vec<Exclusion>,
    pub verdict: Verdict,
    pub provenance: Provenance,
    #[serde(skip)]
    pub dumps: Dumps,
}

/// Largest tolerated share of failed trials.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.01;

impl ExperimentReport {
    pub(crate) fn new(name: &str, config: &ExperimentConfig, label: String) -> Self {
        ExperimentReport {
            name: name.to_string(),
            config: config.clone(),
            records: Vec::new(),
            summary: BTreeMap::new(),
            checks: Vec::new(),
            violations: 0,
            excluded: Vec::new(),
            verdict: Verdict::NotApplicable,
            provenance: Provenance {
                master_seed: config.seed,
                ensemble: label,
                seed_rule: "trial seed = splitmix64(master ^ splitmix64((n << 32) | trial))".into(),
                version: env!("CARGO_PKG_VERSION").into(),
            },
            dumps: Dumps::default(),
        }
    }

    pub(crate) fn record(&mut self, n: usize, trial: usize, seed: u64, metrics: BTreeMap<String, f64>) -> usize {
        let index = self.records.len();
        self.records.push(TrialRecord {
            index,
            n,
            trial,
            seed,
            metrics,
        });
        index
    }

    /// Unwraps a trial result, recording a failed one as an exclusion.
    pub(crate) fn accept<'a, T>(&mut self, o: &'a Outcome<T>) -> Option<&'a T> {
        match &o.result {
            Ok(t) => Some(t),
            Err(e) => {
                self.excluded.push(Exclusion {
                    n: o.n,
                    trial: o.trial,
                    seed: o.seed,
                    reason: e.to_string(),
                });
                None
            }
        }
    }

    pub(crate) fn summarize(&mut self, key: impl Into<String>, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.summary.insert(key.into(), v);
    }

    pub(crate) fn check(&mut self, name: impl Into<String>, value: f64, relation: Relation, threshold: f64) {
        self.checks.push(Check::new(name, value, relation, threshold));
    }

    /// Sets the verdict from the checks and the exclusion rate.
    pub(crate) fn finish(&mut self, applicable: bool) {
        let attempted = self.records.len() + self.excluded.len();
        if attempted > 0 && !self.excluded.is_empty() {
            let rate = self.excluded.len() as f64 / attempted as f64;
            self.check("excluded_fraction", rate, Relation::AtMost, MAX_EXCLUDED_FRACTION);
        }
        self.verdict = if !applicable {
            Verdict::NotApplicable
        } else if self.checks.iter().all(|c| c.passed) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Metric map literal.
#[macro_export]
#[doc(hidden)]
macro_rules! metrics {
    ($($k:expr => $v:expr),* $(,)?) => {{
        let mut m = ::std::collections::BTreeMap::<String, f64>::new();
        $( m.insert(String::from($k), $v as f64); )*
        m
    }};
}
