//! Meshes, P1 spaces, sparse assembly and linear solves.

pub mod assembly;
mod dual;
mod mesh;
mod solve;
mod space;
mod sparse;

pub use assembly::{assemble, Assembled, Coefficient, FormKind};
pub use dual::{dual_norm_vprime, DualNorm};
pub use mesh::{generate_mesh, BoundaryFacet, CellGeometry, Mesh, MeshSpec};
pub use solve::{solve_spd, Factorized, LuCache, SPD_TOL};
pub use space::{FeSpace, Field, SpaceKind};
pub use sparse::SparseOperator;

#[derive(Debug, thiserror::Error)]
pub enum FemError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("unknown boundary marker `{0}`")]
    UnknownMarker(String),
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("linear solve reached relative residual {achieved:e}, target {target:e}")]
    NotConverged { achieved: f64, target: f64 },
    #[error("{0}")]
    Solve(String),
}
