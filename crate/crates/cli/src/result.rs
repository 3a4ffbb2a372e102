use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spec::{Kind, Params};

pub const SCHEMA_VERSION: u32 = 1;

/// JSON summary of one experiment.
///
/// `samples[i]` belongs to replicate `i`; `null` stands for an infinite time
/// or a replicate with no value. Replicates whose value is only a bound
/// are listed in `censored`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema: u32,
    pub kind: Kind,
    pub params: Params,
    pub reps: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<Option<f64>>>,
    /// Second column for two-sided experiments (duality).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_right: Option<Vec<Option<f64>>>,
    #[serde(default)]
    pub censored: Vec<u64>,
    pub estimates: serde_json::Value,
    pub wall_time_s: f64,
    pub version: String,
    pub rng: String,
}

impl ExperimentResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Finite values as numbers, everything else as `null`.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}
