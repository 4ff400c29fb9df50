//! Leggett-type nonlocal realist inequalities that hold for arbitrary
//! measurement settings.
//!
//! The bound of each inequality depends on the settings only through the
//! minimum over the sphere of `Σ|e_i·v|` for three derived directions, which
//! [`bounds`] evaluates in closed form and [`oracle`] checks by brute force.
//! [`quantum`] supplies singlet predictions, [`analysis`] the optimal
//! settings, scans, thresholds and robustness sweeps, and [`hvchecks`] the
//! outcome-level inequalities the bounds are built from.

pub mod analysis;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod hvchecks;
pub mod oracle;
pub mod quantum;
pub mod settings_file;

pub use bounds::{BoundReport, Category, Settings, SettingsCategoryI, SettingsCategoryII};
pub use error::{Error, Result};
pub use geometry::UnitVec3;
pub use quantum::{CorrelationModel, ViolationReport};
