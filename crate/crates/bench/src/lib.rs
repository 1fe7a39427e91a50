//! Persistence, scripted replay and benchmarking for [`pilecore`].
//!
//! * [`state_file`] reads and writes canonical state JSON and computes the
//!   state hash used to compare runs.
//! * [`dataset`] builds the deterministic synthetic datasets.
//! * [`script`] parses replay scripts and runs their commands.
//! * [`replay`] times scripts over repeated runs and builds the report.
//! * [`fuzz`] draws random commands for randomized testing.

pub mod dataset;
pub mod fuzz;
pub mod replay;
pub mod script;
pub mod state_file;

pub use dataset::{DatasetKind, DatasetSpec};
pub use replay::{run, Report, RunOptions, Stats};
pub use script::{Command, Script};
pub use state_file::{from_json, state_hash, to_canonical_json, StateFileError};
