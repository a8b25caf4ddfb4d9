//! Run reports.

use std::collections::BTreeMap;

use finsler_core::check::{Check, Status};
use finsler_core::projective::{ClassificationReport, DimScanReport};
use finsler_core::sample::SampleConfig;
use finsler_core::tensor::{unflat, TensorValue};
use finsler_core::TangentPoint;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::job::{Command, MetricSpec};

const INDEX_NAMES: [char; 4] = ['i', 'j', 'k', 'l'];

/// A tensor as nested row-major arrays. `legend` names the slots, upper
/// indices after `^` and lower ones after `_`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityValue {
    pub legend: String,
    pub variance: String,
    pub shape: Vec<usize>,
    pub value: Value,
}

fn nest(data: &[f64], shape: &[usize]) -> Value {
    match shape.split_first() {
        None => data.first().copied().map_or(Value::Null, Value::from),
        Some((&len, rest)) => {
            let stride: usize = rest.iter().product();
            Value::Array(
                (0..len)
                    .map(|i| nest(&data[i * stride..(i + 1) * stride], rest))
                    .collect(),
            )
        }
    }
}

impl QuantityValue {
    pub fn scalar(name: &str, v: f64) -> QuantityValue {
        QuantityValue {
            legend: name.to_string(),
            variance: String::new(),
            shape: Vec::new(),
            value: Value::from(v),
        }
    }

    pub fn tensor(name: &str, t: &TensorValue) -> QuantityValue {
        let mut upper = String::new();
        let mut lower = String::new();
        for (slot, c) in t.variance.chars().enumerate() {
            let idx = INDEX_NAMES[slot];
            if c == 'u' {
                upper.push(idx);
            } else {
                lower.push(idx);
            }
        }
        let mut legend = name.to_string();
        if !upper.is_empty() {
            legend.push('^');
            legend.push_str(&upper);
        }
        if !lower.is_empty() {
            legend.push('_');
            legend.push_str(&lower);
        }
        let shape = t.shape();
        QuantityValue {
            legend,
            variance: t.variance.clone(),
            value: nest(&t.data, &shape),
            shape,
        }
    }

    /// Component at a multi-index, for scalars the empty index.
    pub fn get(&self, idx: &[usize]) -> Option<f64> {
        let mut v = &self.value;
        for &i in idx {
            v = v.get(i)?;
        }
        v.as_f64()
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        let rank = self.shape.len();
        let n = self.shape.first().copied().unwrap_or(1);
        let count: usize = self.shape.iter().product();
        (0..count)
            .filter_map(|off| self.get(&unflat(n, rank, off)))
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointEvaluation {
    pub index: usize,
    pub point: TangentPoint,
    pub quantities: BTreeMap<String, QuantityValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldClassification {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ClassificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineInfo {
    pub version: String,
    pub orders: BTreeMap<String, usize>,
    pub tolerances: BTreeMap<String, f64>,
    pub samples: SampleConfig,
    pub volume: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub all_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: Command,
    pub metric: MetricInfo,
    pub engine: EngineInfo,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evaluations: Vec<PointEvaluation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classification: Vec<FieldClassification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_scan: Option<DimScanReport>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricInfo {
    pub name: String,
    pub dim: usize,
    pub spec: MetricSpec,
}

impl RunReport {
    /// Recomputes the summary from the checks.
    pub fn finish(&mut self) {
        let mut s = Summary::default();
        for c in &self.checks {
            match c.status {
                Status::Pass => s.passed += 1,
                Status::Fail => s.failed += 1,
                Status::Skipped => s.skipped += 1,
            }
        }
        s.all_pass = s.failed == 0;
        self.summary = s;
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensors_nest_row_major() {
        let t = TensorValue::new(2, "ul", vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let q = QuantityValue::tensor("G", &t);
        assert_eq!(q.legend, "G^i_j");
        assert_eq!(q.shape, vec![2, 2]);
        assert_eq!(q.value, serde_json::json!([[1.0, 2.0], [3.0, 4.0]]));
        assert_eq!(q.get(&[1, 0]), Some(3.0));
        assert_eq!(q.max_abs(), 4.0);
    }

    #[test]
    fn rank_three_and_scalars() {
        let data: Vec<f64> = (0..8).map(f64::from).collect();
        let q = QuantityValue::tensor("D", &TensorValue::new(2, "ull", data).unwrap());
        assert_eq!(q.legend, "D^i_jk");
        assert_eq!(q.get(&[1, 0, 1]), Some(5.0));
        let s = QuantityValue::scalar("F", 1.5);
        assert_eq!(s.get(&[]), Some(1.5));
        assert!(s.shape.is_empty());
    }
}
