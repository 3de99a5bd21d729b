//! Scenario runner for the spectrum equilibrium engine: JSON scenario files,
//! CSV sweeps and the acceptance criteria suite.

pub mod format;
pub mod scenario;
pub mod suite;
pub mod sweep;
