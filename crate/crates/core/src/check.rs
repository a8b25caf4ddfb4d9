//! Pass/fail records shared by the verification suites.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// One verified identity: its worst residual and the threshold it was held to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: Option<f64>,
    pub threshold: f64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn measured(name: impl Into<String>, residual: f64, threshold: f64) -> Check {
        let status = if residual < threshold {
            Status::Pass
        } else {
            Status::Fail
        };
        Check {
            name: name.into(),
            residual: Some(residual),
            threshold,
            status,
            note: None,
        }
    }

    pub fn skipped(name: impl Into<String>, threshold: f64, reason: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            residual: None,
            threshold,
            status: Status::Skipped,
            note: Some(reason.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Check {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Running maximum of a residual over sample points.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MaxResidual(pub f64);

impl MaxResidual {
    pub fn update(&mut self, r: f64) {
        // NaN must surface as a failure rather than vanish in `max`.
        if r.is_nan() || r > self.0 {
            self.0 = if r.is_nan() { f64::INFINITY } else { r };
        }
    }
}
