//! Single-phase linear Biot step (the s_n ≡ 0 limit with a linear storage law).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::femcore::assembly::{div_coupling_matrix, elasticity_matrix, mass_matrix, stiffness_matrix, Coefficient};
use crate::femcore::{Factorized, FeSpace, Mesh};

use super::StepperError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearBiotParams {
    pub lame_mu: f64,
    pub lame_lambda: f64,
    pub biot_b: f64,
    pub biot_m: f64,
    /// mobility K/μ
    pub kappa: f64,
}

/// One backward-Euler step of
/// (1/M)(p - p*) + b div(u - u*) - hκΔp = h q,  -div σ(u) + b∇p = f,
/// with homogeneous Dirichlet data on the given markers.
///
/// `q_load` is ∫ q ψ_i on all vertices; `f_load` is ∫ f·v on all displacement dofs.
/// Returns (p, u) on all dofs.
#[allow(clippy::too_many_arguments)]
pub fn linear_biot_step(
    mesh: Arc<Mesh>,
    flow_dirichlet: &[String],
    mech_dirichlet: &[String],
    params: &LinearBiotParams,
    h: f64,
    p_prev: &[f64],
    u_prev: &[f64],
    q_load: &[f64],
    f_load: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), StepperError> {
    let flow = FeSpace::scalar_dirichlet(mesh.clone(), flow_dirichlet)?;
    let mech = FeSpace::vector_dirichlet(mesh.clone(), mech_dirichlet)?;
    let (np, nu) = (flow.num_free(), mech.num_free());
    let a = elasticity_matrix(&mesh, params.lame_mu, params.lame_lambda);
    let b = div_coupling_matrix(&mesh, params.biot_b);
    let storage = mass_matrix(&mesh).scaled(1.0 / params.biot_m);
    let flow_op = storage.add(&stiffness_matrix(&mesh, &Coefficient::Constant(params.kappa)), h);

    let (pm, um) = (flow.free_map(), mech.free_map());
    let mut t = Vec::new();
    for (r, c, v) in a.triplets() {
        if um[r] != usize::MAX && um[c] != usize::MAX {
            t.push((um[r], um[c], v));
        }
    }
    for (i, c, v) in b.triplets() {
        if pm[i] != usize::MAX && um[c] != usize::MAX {
            t.push((um[c], nu + pm[i], -v));
            t.push((nu + pm[i], um[c], v));
        }
    }
    for (r, c, v) in flow_op.triplets() {
        if pm[r] != usize::MAX && pm[c] != usize::MAX {
            t.push((nu + pm[r], nu + pm[c], v));
        }
    }
    let op = crate::femcore::SparseOperator::from_triplets(nu + np, nu + np, t, false);

    let sp = storage.matvec(p_prev);
    let bu = b.matvec(u_prev);
    let mut rhs = vec![0.0; nu + np];
    rhs[..nu].copy_from_slice(&mech.restrict(f_load));
    for (j, d) in flow.free_dofs().iter().enumerate() {
        rhs[nu + j] = sp[*d] + bu[*d] + h * q_load[*d];
    }
    let x = Factorized::lu(&op)?.solve(&rhs)?;
    Ok((flow.extend_zero(&x[nu..]), mech.extend_zero(&x[..nu])))
}
