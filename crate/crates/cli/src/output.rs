//! Writing results: pretty JSON, and CSV for the raw samples.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{HarnessError, Result};
use crate::result::ExperimentResult;
use crate::spec::Kind;

/// JSON to `path`, or to standard output for `None` / `-`.
pub fn write_json(result: &ExperimentResult, path: Option<&Path>) -> Result<()> {
    let mut text = result.to_json()?;
    text.push('\n');
    match path {
        None => write_stdout(&text),
        Some(p) if p.as_os_str() == "-" => write_stdout(&text),
        Some(p) => std::fs::write(p, text).map_err(|e| HarnessError::io(p, e)),
    }
}

fn write_stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| HarnessError::io(Path::new("<stdout>"), e))
}

pub fn write_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    std::fs::write(path, to_csv(result)).map_err(|e| HarnessError::io(path, e))
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// CSV text of the raw samples.
///
/// Sampling kinds give `replicate_id,value`, plus `value_right` for duality
/// and `censored` when any replicate carries only a bound. Empty cells mean
/// the sample was infinite or absent. `count` lists `k,f,F` and `analytic`
/// lists `name,value`.
pub fn to_csv(result: &ExperimentResult) -> String {
    let mut out = String::new();
    match result.kind {
        Kind::Count => {
            out.push_str("k,f,F\n");
            let col = |key: &str| -> Vec<String> {
                result.estimates[key]
                    .as_array()
                    .map(|a| a.iter().map(|v| v.as_str().unwrap_or_default().to_string()).collect())
                    .unwrap_or_default()
            };
            for (k, (f, big)) in col("f").iter().zip(col("F")).enumerate() {
                let _ = writeln!(out, "{k},{f},{big}");
            }
        }
        Kind::Analytic => {
            out.push_str("name,value\n");
            if let Some(map) = result.estimates.as_object() {
                for (name, v) in map {
                    if let Some(x) = v.as_f64() {
                        let _ = writeln!(out, "{name},{x}");
                    }
                }
            }
        }
        _ => {
            let samples = result.samples.as_deref().unwrap_or_default();
            let right = result.samples_right.as_deref();
            let with_censored = !result.censored.is_empty() || (result.kind == Kind::Btp && result.params.first_hit);
            out.push_str("replicate_id,value");
            if right.is_some() {
                out.push_str(",value_right");
            }
            if with_censored {
                out.push_str(",censored");
            }
            out.push('\n');
            let mut censored = result.censored.iter().peekable();
            for (i, x) in samples.iter().enumerate() {
                let _ = write!(out, "{i},{}", cell(*x));
                if let Some(r) = right {
                    let _ = write!(out, ",{}", cell(r.get(i).copied().flatten()));
                }
                if with_censored {
                    let hit = censored.next_if(|&&c| c == i as u64).is_some();
                    let _ = write!(out, ",{}", hit as u8);
                }
                out.push('\n');
            }
        }
    }
    out
}
