//! Energies, dissipation, the per-step energy audit, graph consistency and conservation.

mod audit;
mod energy;
mod graph;

pub use audit::{
    dual_increments, energy_audit, gronwall_constants, mass_balance, phase_totals, AuditReport, GronwallConstants,
    MassBalance,
};
pub use energy::{
    dissipation, gravity_energy, helmholtz_energy, regularized_fluid_energy, solid_energy, Dissipation, EnergyLedger,
};
pub use graph::{graph_consistency, graph_distance, GraphReport, SIGN_TOL};

use crate::constitutive::ConstitutiveError;
use crate::femcore::FemError;

#[derive(Debug, thiserror::Error)]
pub enum DiagnosticsError {
    #[error("states carry different eps levels ({prev} and {next})")]
    EpsMismatch { prev: f64, next: f64 },
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error(transparent)]
    Constitutive(#[from] ConstitutiveError),
    #[error(transparent)]
    Fem(#[from] FemError),
}
