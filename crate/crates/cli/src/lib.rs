//! Experiment harness for opponent-shaping learning dynamics: configuration,
//! seed fan-out, run classification, and CSV/SVG emission. The `lola` binary
//! is a thin wrapper over this library.

pub mod config;
pub mod runner;
pub mod stats;
pub mod svg;

pub use config::{parse_seeds, ExperimentConfig};
pub use stats::{classify_nash_imp, classify_tft, exploit_table, ExploitTable, SummaryStats};
