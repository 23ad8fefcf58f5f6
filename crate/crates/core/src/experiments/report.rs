use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::ext::ExtResistance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Not enough reliable data to decide (e.g. too many censored samples).
    Abstain,
    /// Reported only; never affects the overall verdict.
    Diagnostic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub value: Value,
    pub threshold: String,
    pub verdict: Verdict,
}

impl Criterion {
    pub fn new(
        name: &str,
        value: impl Into<Value>,
        threshold: impl Into<String>,
        verdict: Verdict,
    ) -> Self {
        Criterion {
            name: name.into(),
            value: value.into(),
            threshold: threshold.into(),
            verdict,
        }
    }

    pub fn check(name: &str, value: f64, threshold: impl Into<String>, ok: bool) -> Self {
        Self::new(
            name,
            value,
            threshold,
            if ok { Verdict::Pass } else { Verdict::Fail },
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleRow {
    pub trial: usize,
    pub value: ExtResistance,
    pub censored: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub master_seed: u64,
    pub params: BTreeMap<String, Value>,
    pub statistics: BTreeMap<String, Value>,
    pub criteria: Vec<Criterion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
    /// Unix time the report was produced.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    #[serde(skip)]
    pub samples: Vec<SampleRow>,
}

/// A JSON number, or the string `"inf"` for ∞ (JSON has no infinity).
pub(crate) fn ext_value(r: ExtResistance) -> Value {
    if r.is_infinite() {
        Value::from("inf")
    } else {
        Value::from(r.value())
    }
}

impl ExperimentReport {
    pub fn new(experiment: &str, master_seed: u64) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            master_seed,
            params: BTreeMap::new(),
            statistics: BTreeMap::new(),
            criteria: Vec::new(),
            runtime_seconds: None,
            timestamp: None,
            samples: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.params.insert(key.into(), value.into());
        self
    }

    pub fn stat(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.statistics.insert(key.into(), value.into());
        self
    }

    pub fn push(&mut self, criterion: Criterion) -> &mut Self {
        self.criteria.push(criterion);
        self
    }

    /// Fail if any criterion failed, else abstain if any abstained, else pass.
    pub fn overall(&self) -> Verdict {
        let has = |v| self.criteria.iter().any(|c| c.verdict == v);
        if has(Verdict::Fail) {
            Verdict::Fail
        } else if has(Verdict::Abstain) {
            Verdict::Abstain
        } else {
            Verdict::Pass
        }
    }

    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct WithVerdict<'a> {
            #[serde(flatten)]
            report: &'a ExperimentReport,
            verdict: Verdict,
        }
        serde_json::to_string_pretty(&WithVerdict {
            report: self,
            verdict: self.overall(),
        })
        .expect("report serialises")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "experiment  {}", self.experiment);
        let _ = writeln!(out, "seed        {}", self.master_seed);
        let section = |out: &mut String, title: &str, map: &BTreeMap<String, Value>| {
            let _ = writeln!(out, "\n{title}");
            let width = map.keys().map(String::len).max().unwrap_or(0);
            for (k, v) in map {
                let _ = writeln!(out, "  {k:<width$}  {v}");
            }
        };
        section(&mut out, "parameters", &self.params);
        section(&mut out, "statistics", &self.statistics);
        let _ = writeln!(out, "\ncriteria");
        let width = self
            .criteria
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(0);
        for c in &self.criteria {
            let verdict = format!("{:?}", c.verdict).to_uppercase();
            let _ = writeln!(
                out,
                "  {:<width$}  {:<10}  {:<24}  {}",
                c.name,
                verdict,
                c.value.to_string(),
                c.threshold
            );
        }
        let _ = writeln!(
            out,
            "\nverdict     {}",
            format!("{:?}", self.overall()).to_uppercase()
        );
        if let Some(t) = self.runtime_seconds {
            let _ = writeln!(out, "runtime     {t:.2}s");
        }
        out
    }

    /// Raw samples as CSV with columns `trial,value_or_inf,censored`.
    pub fn samples_csv(&self) -> String {
        let mut out = String::from("trial,value_or_inf,censored\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{}", s.trial, s.value, s.censored);
        }
        out
    }
}
