//! Fault-tolerant fusion of interval readings from partially faulty sensors.

pub mod cli;
pub mod error;
pub mod fusion;
pub mod metrics;
pub mod optimal;
pub mod oracle;
pub mod scenario;
pub mod subsets;

pub use error::{FusionError, Result};
pub use scenario::{Interval, ScenarioParams};
