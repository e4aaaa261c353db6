//! Command-line harness around the `quadgemm` library.
//!
//! Every command builds a [`table::Table`] which is written as CSV and
//! rendered as an aligned text table. Columns holding wall-clock
//! measurements are flagged and left out of the table digest, so two runs
//! with the same flags, seed and config produce the same digest.

pub mod commands;
pub mod config;
pub mod error;
pub mod matio;
pub mod selftest;
pub mod table;
pub mod trace;

pub use config::Config;
pub use error::{NumericalError, UsageError};
pub use table::Table;
