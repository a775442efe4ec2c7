use std::sync::Arc;

use crate::femcore::assembly::{div_coupling_matrix, elasticity_matrix, lumped_mass, mass_matrix};
use crate::femcore::{Factorized, FeSpace, Mesh, SparseOperator};

use super::params::MaterialParams;
use super::CoupledError;

/// Spaces and parameter-dependent linear operators shared by all steps.
#[derive(Debug, Clone)]
pub struct Spaces {
    pub mesh: Arc<Mesh>,
    /// pressure offsets (zero on the flow Dirichlet part)
    pub flow: FeSpace,
    /// displacement (zero on the mechanics Dirichlet part)
    pub mech: FeSpace,
    pub nodal: FeSpace,
    pub lumped: Vec<f64>,
    /// consistent scalar mass, all vertices
    pub mass: SparseOperator,
    /// elasticity on free displacement dofs
    pub elasticity: SparseOperator,
    /// (w, v) ↦ ∫ b w div v, all vertices × free displacement dofs
    pub div: SparseOperator,
    /// Cholesky factor of `elasticity`
    pub elasticity_factor: Arc<Factorized>,
}

impl Spaces {
    pub fn new(
        mesh: Arc<Mesh>,
        flow_dirichlet: &[String],
        mech_dirichlet: &[String],
        params: &MaterialParams,
    ) -> Result<Self, CoupledError> {
        if mech_dirichlet.is_empty() {
            return Err(CoupledError::InvalidParams(
                "the mechanics Dirichlet boundary must be nonempty".into(),
            ));
        }
        params.check(mesh.num_vertices())?;
        let flow = FeSpace::scalar_dirichlet(mesh.clone(), flow_dirichlet)?;
        let mech = FeSpace::vector_dirichlet(mesh.clone(), mech_dirichlet)?;
        if !mech.has_dirichlet() {
            return Err(CoupledError::InvalidParams(
                "mechanics Dirichlet boundary has no vertices".into(),
            ));
        }
        let nodal = FeSpace::scalar(mesh.clone());
        let nv = mesh.num_vertices();
        let elasticity = elasticity_matrix(&mesh, params.lame_mu, params.lame_lambda).restrict(
            mech.free_map(),
            mech.num_free(),
            mech.free_map(),
            mech.num_free(),
        );
        let ident: Vec<usize> = (0..nv).collect();
        let div = div_coupling_matrix(&mesh, params.biot_b).restrict(&ident, nv, mech.free_map(), mech.num_free());
        let elasticity_factor = Arc::new(Factorized::cholesky(&elasticity)?);
        Ok(Self {
            elasticity_factor,
            lumped: lumped_mass(&mesh),
            mass: mass_matrix(&mesh),
            mesh,
            flow,
            mech,
            nodal,
            elasticity,
            div,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.mesh.num_vertices()
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim
    }

    /// Consistent load ∫ f·v on free displacement dofs for a nodal vector field.
    pub fn vector_load(&self, f: &[[f64; 2]]) -> Vec<f64> {
        let d = self.dim();
        let mut full = vec![0.0; self.mech.num_dofs()];
        for a in 0..d {
            let comp: Vec<f64> = f.iter().map(|v| v[a]).collect();
            for (i, v) in self.mass.matvec(&comp).into_iter().enumerate() {
                full[i * d + a] = v;
            }
        }
        self.mech.restrict(&full)
    }

    /// uᵀAu for a full displacement vector.
    pub fn energy_norm_sq(&self, u: &[f64]) -> f64 {
        self.elasticity.quadratic_form(&self.mech.restrict(u))
    }

    /// Nodal lumped ∫ b ψ_i div u / m_i.
    pub fn lumped_div(&self, u: &[f64]) -> Vec<f64> {
        let bu = self.div.matvec(&self.mech.restrict(u));
        bu.iter().zip(&self.lumped).map(|(a, m)| a / m).collect()
    }

    pub fn lumped_l2_sq(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.lumped).map(|(x, m)| m * x * x).sum()
    }
}
