use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Percolate,
    Ofpp,
    Richardson,
    Cover,
    Btp,
    Count,
    Analytic,
    Duality,
    Conjecture,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::Percolate,
        Kind::Ofpp,
        Kind::Richardson,
        Kind::Cover,
        Kind::Btp,
        Kind::Count,
        Kind::Analytic,
        Kind::Duality,
        Kind::Conjecture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Percolate => "percolate",
            Kind::Ofpp => "ofpp",
            Kind::Richardson => "richardson",
            Kind::Cover => "cover",
            Kind::Btp => "btp",
            Kind::Count => "count",
            Kind::Analytic => "analytic",
            Kind::Duality => "duality",
            Kind::Conjecture => "conjecture",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::Invalid(format!("unknown experiment kind '{s}'")))
    }
}

/// Experiment parameters. Only the ones a kind reads need to be set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub oriented: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub first_hit: bool,
    /// `count` algorithm: `dp` (default) or `brute`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    /// Quantity requested from `analytic`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub what: Option<String>,
    /// Free-form numeric arguments for `analytic`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

impl Params {
    pub fn require_n(&self) -> Result<u32> {
        self.n.ok_or_else(|| HarnessError::Invalid("--n is required".into()))
    }

    pub fn require_t(&self) -> Result<f64> {
        self.t.ok_or_else(|| HarnessError::Invalid("--t is required".into()))
    }

    /// Reads `k=v,k=v` into [`Params::extra`].
    pub fn parse_extra(text: &str) -> Result<BTreeMap<String, f64>> {
        let mut out = BTreeMap::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| HarnessError::Invalid(format!("expected key=value, got '{item}'")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| HarnessError::Invalid(format!("'{value}' is not a number")))?;
            out.insert(key.trim().to_string(), value);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: Kind,
    pub params: Params,
    pub reps: u64,
    /// Defaults to 0.
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
    /// JSON destination; `None` or `-` means standard output.
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(kind: Kind, params: Params, reps: u64, seed: u64) -> Self {
        ExperimentSpec { kind, params, reps, seed, jobs: 0, out: None, csv: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(HarnessError::Invalid("--reps must be at least 1".into()));
        }
        Ok(())
    }
}
