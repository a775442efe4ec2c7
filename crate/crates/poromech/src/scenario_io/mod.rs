//! Scenario documents, validation, run orchestration, output files and the CLI.

mod battery;
pub mod cli;
mod config;
mod output;
mod run;
mod validate;

use std::path::PathBuf;

pub use battery::{audit_battery, Check};
pub use config::{
    load_config, load_config_file, BoundaryConfig, CapillaryConfig, Config, DirichletConfig, FieldSpec, InitialConfig,
    MaterialConfig, MeshConfig, PermeabilityConfig, RunConfig, Scenario,
};
pub use output::{
    field_text, fmt_float, parse_field_text, sha256_hex, FieldRows, RunManifest, SeriesRow, SeriesWriter, StepEntry,
    Timing, SERIES_COLUMNS,
};
pub use run::{run_scenario, RunReport};
pub use validate::{validate, ValidationReport, Violation, RULES};

use crate::constitutive::ConstitutiveError;
use crate::coupled::CoupledError;
use crate::diagnostics::DiagnosticsError;
use crate::femcore::FemError;
use crate::stepper::StepperError;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("validation failed:\n{0}")]
    Validation(ValidationReport),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Constitutive(#[from] ConstitutiveError),
    #[error(transparent)]
    Coupled(#[from] CoupledError),
    #[error(transparent)]
    Stepper(#[from] StepperError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}

const BUNDLED: &[(&str, &str)] = &[
    ("equilibrium", include_str!("../../scenarios/equilibrium.toml")),
    ("drainage", include_str!("../../scenarios/drainage.toml")),
    ("compaction", include_str!("../../scenarios/compaction.toml")),
    ("redistribution", include_str!("../../scenarios/redistribution.toml")),
];

/// Names of the scenarios shipped with the crate.
pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

/// Source text of a bundled scenario.
pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
