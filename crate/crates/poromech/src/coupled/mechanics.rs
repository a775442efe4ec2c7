use crate::constitutive::{f_eps_energy, soft_constraint_g, PhaseContentPair, RegularizedModel};
use crate::femcore::{Factorized, SparseOperator};

use super::params::MaterialParams;
use super::spaces::Spaces;
use super::state::State;
use super::CoupledError;

/// f = (φ_n ρ_n + φ_w ρ_w + (1 - φ_r) ρ_sr) g + f_ext at every vertex.
pub fn body_force(contents: &[PhaseContentPair], params: &MaterialParams) -> Vec<[f64; 2]> {
    contents
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let rho =
                c.phi_n * params.density_n + c.phi_w * params.density_w + (1.0 - params.phi_r[i]) * params.rho_sr[i];
            [
                rho * params.gravity[0] + params.f_ext[i][0],
                rho * params.gravity[1] + params.f_ext[i][1],
            ]
        })
        .collect()
}

/// Solves A u = Bᵀπ + F(f); returns all displacement dofs (zero on the Dirichlet part).
pub fn solve_mechanics(pi: &[f64], f: &[[f64; 2]], spaces: &Spaces) -> Result<Vec<f64>, CoupledError> {
    let n = spaces.num_vertices();
    if pi.len() != n || f.len() != n {
        return Err(CoupledError::InvalidParams(
            "field length does not match the mesh".into(),
        ));
    }
    let mut rhs = spaces.div.matvec_transpose(pi);
    for (r, l) in rhs.iter_mut().zip(spaces.vector_load(f)) {
        *r += l;
    }
    let u = spaces.elasticity_factor.solve(&rhs)?;
    Ok(spaces.mech.extend_zero(&u))
}

/// Bᵀ D⁻¹ B scaled by `c`, D the lumped mass.
fn schur_term(div: &SparseOperator, lumped: &[f64], c: f64) -> SparseOperator {
    let mut t = Vec::new();
    for (i, m) in lumped.iter().enumerate() {
        let row: Vec<(usize, f64)> = div.row(i).collect();
        for (a, va) in &row {
            for (b, vb) in &row {
                t.push((*a, *b, c * va * vb / m));
            }
        }
    }
    SparseOperator::from_triplets(div.ncols, div.ncols, t, true)
}

/// Initial mechanical equilibrium for contents `phi0`, with χ⁰ = G_ε(φ⁰).
///
/// θ is eliminated through the lumped constraint, which adds M Bᵀ D⁻¹ B to the elasticity form.
pub fn init_state(
    phi0: &[PhaseContentPair],
    params: &MaterialParams,
    spaces: &Spaces,
    reg: &RegularizedModel,
) -> Result<State, CoupledError> {
    let n = spaces.num_vertices();
    if phi0.len() != n {
        return Err(CoupledError::InvalidParams(
            "initial contents do not match the mesh".into(),
        ));
    }
    let b = &params.bounds;
    for (i, c) in phi0.iter().enumerate() {
        if !c.in_k_phi(b) {
            return Err(CoupledError::OutOfBounds {
                what: "initial content pair",
                index: i,
                value: c.phi(),
            });
        }
    }
    let m = params.biot_m;
    let phi: Vec<f64> = phi0.iter().map(|c| c.phi()).collect();
    let excess: Vec<f64> = (0..n).map(|i| phi[i] - params.phi_r[i]).collect();
    let op = spaces.elasticity.add(&schur_term(&spaces.div, &spaces.lumped, m), 1.0);
    let f = body_force(phi0, params);
    let mut rhs = spaces.div.matvec_transpose(&excess);
    rhs.iter_mut().for_each(|v| *v *= m);
    for (r, l) in rhs.iter_mut().zip(spaces.vector_load(&f)) {
        *r += l;
    }
    let uf = Factorized::cholesky(&op)?.solve(&rhs)?;
    let u = spaces.mech.extend_zero(&uf);
    let div = spaces.lumped_div(&u);
    let theta: Vec<f64> = (0..n).map(|i| excess[i] - div[i]).collect();
    let pi: Vec<f64> = theta.iter().map(|t| m * t).collect();

    let eps = reg.eps();
    let (mut chi, mut p_n, mut p_w) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let c = interior_pair(phi0[i], params);
        chi[i] = soft_constraint_g(b, eps, c.phi())?;
        let g = f_eps_energy(reg, b, c)?
            .gradient
            .expect("pair nudged into the open porosity interval");
        p_n[i] = pi[i] + g[0];
        p_w[i] = pi[i] + g[1];
    }
    Ok(State {
        phi_n: phi0.iter().map(|c| c.phi_n).collect(),
        phi_w: phi0.iter().map(|c| c.phi_w).collect(),
        u,
        theta,
        pi,
        chi,
        p_n,
        p_w,
        eps,
    })
}

/// Moves a pair on a porosity face a relative 1e-9 of the bound width inwards.
fn interior_pair(c: PhaseContentPair, params: &MaterialParams) -> PhaseContentPair {
    let b = &params.bounds;
    let phi = c.phi();
    let margin = 1e-9 * b.width();
    let target = phi.clamp(b.phi_lo + margin, b.phi_hi - margin);
    if target == phi {
        return c;
    }
    let s = c.s_n();
    PhaseContentPair::new(target * s, target * (1.0 - s))
}
