pub mod config;
pub mod error;
pub mod exec;
pub mod matel;
pub mod model;
pub mod perturb;
pub mod quad;
pub mod recurrence;
pub mod report;
pub mod specfun;

pub use config::{OutputFormat, RunConfig};
pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{HartmannModel, QuantumState, UnitSystem};
