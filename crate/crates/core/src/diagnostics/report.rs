//! The report every probe returns, with its JSON and CSV forms.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{KobError, Result};
use crate::point::CPoint;

pub const REPORT_SCHEMA: &str = "koblab-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    VisibilityScan,
    KPoint,
    GrowthFit,
    Goldilocks,
    Localization,
    Sameheight,
    BidiscCase,
    OmegaPsiCase,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    Violated,
    Inconclusive,
}

/// One grid point of a probe. `lower`/`upper` always bracket the certified
/// quantity of the probe; `statistic` is the probe's headline number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub grid_value: f64,
    pub lower: f64,
    pub upper: f64,
    pub statistic: f64,
    #[serde(default)]
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<CPoint>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

impl Sample {
    pub fn new(grid_value: f64, lower: f64, upper: f64, statistic: f64) -> Self {
        Sample { grid_value, lower, upper, statistic, flags: Vec::new(), inputs: Vec::new(), extra: BTreeMap::new() }
    }

    pub fn flag(mut self, name: &str, on: bool) -> Self {
        if on {
            self.flags.push(name.to_string());
        }
        self
    }

    pub fn with_inputs(mut self, inputs: Vec<CPoint>) -> Self {
        self.inputs = inputs;
        self
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub schema: String,
    pub probe: ProbeKind,
    pub grid: Vec<f64>,
    pub samples: Vec<Sample>,
    pub fitted: BTreeMap<String, f64>,
    pub verdict: Verdict,
    /// Finer reading of the verdict, such as `consistent-with-visibility`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<String>,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, serde_json::Value>,
    /// Run metadata such as a timestamp; left empty for reproducible runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

impl ProbeReport {
    pub fn new(probe: ProbeKind, grid: Vec<f64>) -> Self {
        ProbeReport {
            schema: REPORT_SCHEMA.to_string(),
            probe,
            grid,
            samples: Vec::new(),
            fitted: BTreeMap::new(),
            verdict: Verdict::Inconclusive,
            classification: None,
            notes: Vec::new(),
            parameters: BTreeMap::new(),
            metadata: None,
        }
    }

    pub fn param<T: Serialize>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).expect("parameters serialize");
        self.parameters.insert(key.to_string(), v);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn classify(&mut self, verdict: Verdict, classification: Option<&str>) {
        self.verdict = verdict;
        self.classification = classification.map(str::to_string);
    }

    /// Re-checks every certified bracket; a reversed bracket or a non-finite
    /// number is an internal soundness failure.
    pub fn check(&self) -> Result<()> {
        for (i, s) in self.samples.iter().enumerate() {
            let nums = [s.grid_value, s.lower, s.upper, s.statistic];
            if nums.iter().any(|x| !x.is_finite()) || s.extra.values().any(|x| !x.is_finite()) {
                return Err(KobError::Soundness(format!("sample {i} has a non-finite entry")));
            }
            if s.lower > s.upper {
                return Err(KobError::Soundness(format!("sample {i}: lower {} exceeds upper {}", s.lower, s.upper)));
            }
        }
        if let Some((k, _)) = self.fitted.iter().find(|(_, v)| !v.is_finite()) {
            return Err(KobError::Soundness(format!("fitted parameter {k} is not finite")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// One row per sample: `grid_value,lower,upper,statistic,flags`, floats
    /// with 17 significant digits and flags joined by `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("grid_value,lower,upper,statistic,flags\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_float(s.grid_value),
                fmt_float(s.lower),
                fmt_float(s.upper),
                fmt_float(s.statistic),
                s.flags.join(";")
            );
        }
        out
    }

    pub(crate) fn statistics(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.statistic).collect()
    }
}

/// Scientific notation with 17 significant digits, enough to round-trip.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}
