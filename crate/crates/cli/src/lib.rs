//! Config-driven runs of the dephased XXZ relaxation analysis.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{RunConfig, SweepParam, Task};
pub use error::CliError;
pub use run::{run, Manifest};
