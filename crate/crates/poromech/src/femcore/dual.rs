use super::assembly::{mass_matrix, stiffness_matrix, Coefficient};
use super::solve::Factorized;
use super::space::FeSpace;
use super::FemError;

/// Riesz map for the V′ norm, factorized once.
///
/// With a Dirichlet part the norm on V is ‖∇v‖; without one the full H¹ norm is used.
#[derive(Debug)]
pub struct DualNorm {
    space: FeSpace,
    factor: Factorized,
}

impl DualNorm {
    pub fn new(space: &FeSpace) -> Result<Self, FemError> {
        if space.ncomp != 1 {
            return Err(FemError::SpaceMismatch("dual norm needs a scalar space".into()));
        }
        let mesh = &*space.mesh;
        let mut op = stiffness_matrix(mesh, &Coefficient::Constant(1.0));
        if !space.has_dirichlet() {
            op = op.add(&mass_matrix(mesh), 1.0);
        }
        let op = op.restrict(space.free_map(), space.num_free(), space.free_map(), space.num_free());
        Ok(Self {
            space: space.clone(),
            factor: Factorized::cholesky(&op)?,
        })
    }

    pub fn uses_h1_fallback(&self) -> bool {
        !self.space.has_dirichlet()
    }

    /// Norm of a covector given on all nodal dofs; constrained entries are ignored.
    pub fn norm(&self, functional: &[f64]) -> Result<f64, FemError> {
        if functional.len() != self.space.num_dofs() {
            return Err(FemError::DimensionMismatch {
                expected: self.space.num_dofs(),
                got: functional.len(),
            });
        }
        let g = self.space.restrict(functional);
        let r = self.factor.solve(&g)?;
        let v: f64 = r.iter().zip(&g).map(|(a, b)| a * b).sum();
        Ok(v.max(0.0).sqrt())
    }
}

/// One-shot V′ norm of a covector on `space`.
pub fn dual_norm_vprime(functional: &[f64], space: &FeSpace) -> Result<f64, FemError> {
    DualNorm::new(space)?.norm(functional)
}
