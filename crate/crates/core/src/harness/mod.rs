//! Experiment orchestration: run configuration, reference management,
//! convergence and regime studies, and report emission.

pub mod config;
pub mod presets;
pub mod reference;
pub mod report;
pub mod study;

pub use config::{GridSpec, ReferenceSpec, RunConfig};
pub use presets::{table_preset, TableSpec};
pub use reference::ReferenceStore;
pub use report::{LongTimeReport, ReportFormat, StudyReport, StudyRow};
pub use study::{
    convergence_study, long_time_study, regime_sweep, run_single, Axis, Regime, RunOutput,
};
