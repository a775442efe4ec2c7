use serde::{Deserialize, Serialize};

use crate::constitutive::{f_eps_energy, PhaseContentPair, RegularizedModel};
use crate::coupled::{body_force, MaterialParams, Spaces, State};
use crate::femcore::assembly::cell_gradients;

use super::DiagnosticsError;

/// Energies of one state plus the per-step audit terms.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub f_f: f64,
    pub f_s: f64,
    pub f_g: f64,
    pub f_eps: f64,
    pub constraint_violation: f64,
    pub dissipation: f64,
    pub kirchhoff_lower_bound: f64,
    pub boundary_work: f64,
    pub step_inequality_residual: f64,
}

/// Σ m_i F_ε(φ_i) over vertices (F_ε = φγ_ε(s_n) + 𝒢_ε(φ)).
pub fn regularized_fluid_energy(
    state: &State,
    params: &MaterialParams,
    spaces: &Spaces,
    reg: &RegularizedModel,
) -> Result<f64, DiagnosticsError> {
    let mut acc = 0.0;
    for (i, m) in spaces.lumped.iter().enumerate() {
        acc += m * f_eps_energy(reg, &params.bounds, state.pair(i))?.value;
    }
    Ok(acc)
}

/// ½uᵀAu + Σ m_i (M/2) θ_i².
pub fn solid_energy(state: &State, params: &MaterialParams, spaces: &Spaces) -> f64 {
    0.5 * spaces.energy_norm_sq(&state.u) + 0.5 * params.biot_m * spaces.lumped_l2_sq(&state.theta)
}

/// -∫ f(φ)·(x + u) with the consistent mass.
pub fn gravity_energy(state: &State, params: &MaterialParams, spaces: &Spaces) -> f64 {
    let d = spaces.dim();
    let f = body_force(&state.pairs(), params);
    let mut acc = 0.0;
    for a in 0..d {
        let pos: Vec<f64> = spaces
            .mesh
            .coords
            .iter()
            .enumerate()
            .map(|(i, x)| x[a] + state.u[i * d + a])
            .collect();
        let fa: Vec<f64> = f.iter().map(|v| v[a]).collect();
        let mf = spaces.mass.matvec(&fa);
        acc -= mf.iter().zip(&pos).map(|(x, y)| x * y).sum::<f64>();
    }
    acc
}

/// F_f, F_s, F_g and F_eps; the remaining ledger fields are left at zero.
pub fn helmholtz_energy(
    state: &State,
    params: &MaterialParams,
    spaces: &Spaces,
    reg: &RegularizedModel,
) -> Result<EnergyLedger, DiagnosticsError> {
    let base = reg.base();
    let f_f = spaces
        .lumped
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let p = state.pair(i);
            m * p.phi() * base.gamma_value(p.s_n())
        })
        .sum();
    let f_s = solid_energy(state, params, spaces);
    let f_g = gravity_energy(state, params, spaces);
    let f_eps = regularized_fluid_energy(state, params, spaces, reg)? + f_s + f_g;
    Ok(EnergyLedger {
        f_f,
        f_s,
        f_g,
        f_eps,
        constraint_violation: state.constraint_violation(spaces, params),
        ..Default::default()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dissipation {
    pub value: f64,
    pub kirchhoff_lower_bound: f64,
    /// lower bound ≤ (μ♯/K♭) D + 1e-10 scale
    pub ordered: bool,
}

/// D = Σ_α Σ_K (s_α/μ_α) K(φ) |∇p_α|² |K| with cell-mean contents.
///
/// The lower bound is Σ_K |K| (s_n s_w |∇(p_n - p_w)|² + |s_n∇p_n + s_w∇p_w|²).
pub fn dissipation(state: &State, params: &MaterialParams, spaces: &Spaces) -> Dissipation {
    let mesh = &*spaces.mesh;
    let gn = cell_gradients(mesh, &state.p_n);
    let gw = cell_gradients(mesh, &state.p_w);
    let (mut d, mut lb) = (0.0, 0.0);
    for k in 0..mesh.num_cells() {
        let c = mesh.cell(k);
        let inv = 1.0 / c.len() as f64;
        let pn: f64 = c.iter().map(|v| state.phi_n[*v]).sum::<f64>() * inv;
        let pw: f64 = c.iter().map(|v| state.phi_w[*v]).sum::<f64>() * inv;
        let pair = PhaseContentPair::new(pn, pw);
        let (sn, sw) = (pair.s_n(), pair.s_w());
        let perm = params.permeability.eval_unchecked(pair.phi());
        let vol = mesh.geometry(k).measure;
        let nn = gn[k][0] * gn[k][0] + gn[k][1] * gn[k][1];
        let nw = gw[k][0] * gw[k][0] + gw[k][1] * gw[k][1];
        d += vol * perm * (sn / params.viscosity_n * nn + sw / params.viscosity_w * nw);
        let diff = [gn[k][0] - gw[k][0], gn[k][1] - gw[k][1]];
        let mix = [sn * gn[k][0] + sw * gw[k][0], sn * gn[k][1] + sw * gw[k][1]];
        lb += vol * (sn * sw * (diff[0] * diff[0] + diff[1] * diff[1]) + mix[0] * mix[0] + mix[1] * mix[1]);
    }
    let (k_lo, _) = params.permeability.bounds(&params.bounds);
    let ratio = params.mu_max() / k_lo;
    let ordered = lb <= ratio * d + 1e-10 * (1.0 + lb.abs());
    Dissipation {
        value: d,
        kirchhoff_lower_bound: lb,
        ordered,
    }
}
