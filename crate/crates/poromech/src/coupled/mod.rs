//! Material laws, the mechanics solve, initial equilibrium and the weak coupling audit.

mod audit;
mod mechanics;
mod params;
mod spaces;
mod state;

pub use audit::{weak_coupling_audit, CosineField, WeakCouplingReport};
pub use mechanics::{body_force, init_state, solve_mechanics};
pub use params::{permeability, MaterialParams, PermeabilityLaw};
pub use spaces::Spaces;
pub use state::State;

use crate::constitutive::ConstitutiveError;
use crate::femcore::FemError;

#[derive(Debug, thiserror::Error)]
pub enum CoupledError {
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Constitutive(#[from] ConstitutiveError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{what} = {value} at index {index} is outside the porosity bounds")]
    OutOfBounds {
        what: &'static str,
        index: usize,
        value: f64,
    },
}
