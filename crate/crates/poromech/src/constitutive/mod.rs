//! Pure constitutive laws: capillary energy, phase pressures, Kirchhoff
//! transforms, the ε-regularized family, Φ_ε, F_ε and the K_φ projection.

mod capillary;
mod error;
mod kirchhoff;
mod phimap;
mod project;
pub mod quadrature;
mod regularized;
mod soft;

pub use capillary::{BrooksCorey, CapillaryLaw, CapillaryModel, Tabulated};
pub use error::ConstitutiveError;
pub use kirchhoff::{kirchhoff_eval, psi, psi_by_quadrature, xi};
pub use phimap::{
    f_eps_energy, hat_pressures, phi_from_potentials, phi_from_potentials_with_jacobian, saturation_from_capillary,
    FEps, HatPressures, PhaseContentPair,
};
pub use project::project_k_phi;
pub use regularized::RegularizedModel;
pub use soft::{
    mobility_floor, soft_constraint_g, soft_constraint_g_inv, soft_constraint_g_inv_with_derivative,
    soft_constraint_g_prime, soft_constraint_potential, PorosityBounds,
};
