//! Experiment harness for `cubeperc-core`: seeded replicate fan-out over a
//! thread pool, JSON and CSV output, and the `cubeperc` command line.
//!
//! Replicate `i` of an experiment always draws from the stream keyed by
//! `(seed, i)`, so results do not depend on the number of workers.

pub mod error;
pub mod output;
pub mod result;
pub mod run;
pub mod spec;

pub use error::{HarnessError, Result};
pub use result::{ExperimentResult, SCHEMA_VERSION};
pub use run::run;
pub use spec::{ExperimentSpec, Kind, Params};
