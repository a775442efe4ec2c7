use serde::{Deserialize, Serialize};

use crate::constitutive::RegularizedModel;
use crate::coupled::{MaterialParams, Spaces, State};
use crate::femcore::DualNorm;
use crate::stepper::{FrozenData, FrozenSystem};

use super::energy::{regularized_fluid_energy, solid_energy};
use super::DiagnosticsError;

/// Terms of the tested step equation and the convexity inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Σ_α Σ m_i Δφ_α (p_α - π)
    pub a: f64,
    /// Σ m_i Δφ π
    pub b: f64,
    /// h Σ_α pᵀ K_α p
    pub d: f64,
    /// Σ_α Σ m_i Δφ_α p^D_α
    pub r: f64,
    /// Dirichlet and gravity work
    pub w: f64,
    /// |𝒜 + ℬ + 𝒟 - ℛ - W| / scale
    pub identity_defect: f64,
    /// 𝒜 + ℬ + F·Δu - (F_conv(next) - F_conv(prev))
    pub inequality_residual: f64,
    /// 1 + |F_conv(prev)| + |F_conv(next)|
    pub energy_scale: f64,
}

impl AuditReport {
    pub fn inequality_holds(&self, rel: f64) -> bool {
        self.inequality_residual >= -rel * self.energy_scale
    }
}

/// Audits one accepted step `prev → next` solved with frozen data `frozen`.
#[allow(clippy::too_many_arguments)]
pub fn energy_audit(
    prev: &State,
    next: &State,
    frozen: &FrozenData,
    h: f64,
    params: &MaterialParams,
    spaces: &Spaces,
    reg: &RegularizedModel,
) -> Result<AuditReport, DiagnosticsError> {
    if prev.eps != next.eps || next.eps != reg.eps() {
        return Err(DiagnosticsError::EpsMismatch {
            prev: prev.eps,
            next: next.eps,
        });
    }
    let sys = FrozenSystem::new(spaces, params, reg, prev, frozen, h);
    let m = &spaces.lumped;
    let nv = m.len();
    let (mut a, mut b, mut d, mut r, mut w) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for al in 0..2 {
        let (c1, c0) = (next.content(al), prev.content(al));
        let p = next.pressure(al);
        let pd = &params.p_dirichlet[al];
        for i in 0..nv {
            let dphi = m[i] * (c1[i] - c0[i]);
            a += dphi * (p[i] - next.pi[i]);
            r += dphi * pd[i];
        }
        let kp = sys.stiffness(al).matvec(p);
        let g = sys.gravity_vector(al);
        for i in 0..nv {
            d += h * p[i] * kp[i];
            w += h * pd[i] * kp[i] + (p[i] - pd[i]) * g[i];
        }
    }
    for i in 0..nv {
        b += m[i] * (next.phi_n[i] + next.phi_w[i] - prev.phi_n[i] - prev.phi_w[i]) * next.pi[i];
    }
    let scale = a.abs() + b.abs() + d.abs() + r.abs() + w.abs();
    let identity_defect = if scale > 0.0 {
        (a + b + d - r - w).abs() / scale
    } else {
        0.0
    };

    let conv = |s: &State| -> Result<f64, DiagnosticsError> {
        Ok(regularized_fluid_energy(s, params, spaces, reg)? + solid_energy(s, params, spaces))
    };
    let (e0, e1) = (conv(prev)?, conv(next)?);
    let du: Vec<f64> = spaces
        .mech
        .restrict(&next.u)
        .iter()
        .zip(spaces.mech.restrict(&prev.u))
        .map(|(x, y)| x - y)
        .collect();
    let work: f64 = sys.load().iter().zip(&du).map(|(f, u)| f * u).sum();
    Ok(AuditReport {
        a,
        b,
        d,
        r,
        w,
        identity_defect,
        inequality_residual: a + b + work - (e1 - e0),
        energy_scale: 1.0 + e0.abs() + e1.abs(),
    })
}

/// Per-phase totals Σ m_i φ_α.
pub fn phase_totals(state: &State, spaces: &Spaces) -> [f64; 2] {
    [0, 1].map(|a| state.content(a).iter().zip(&spaces.lumped).map(|(p, m)| p * m).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassBalance {
    pub totals: Vec<[f64; 2]>,
    /// totals minus the initial totals
    pub drift: Vec<[f64; 2]>,
    pub max_relative_drift: [f64; 2],
}

pub fn mass_balance(states: &[State], spaces: &Spaces) -> Result<MassBalance, DiagnosticsError> {
    let first = states.first().ok_or(DiagnosticsError::EmptyTrajectory)?;
    let t0 = phase_totals(first, spaces);
    let totals: Vec<[f64; 2]> = states.iter().map(|s| phase_totals(s, spaces)).collect();
    let drift: Vec<[f64; 2]> = totals.iter().map(|t| [t[0] - t0[0], t[1] - t0[1]]).collect();
    let mut max_relative_drift = [0.0f64; 2];
    for dr in &drift {
        for a in 0..2 {
            let rel = dr[a].abs() / t0[a].abs().max(f64::MIN_POSITIVE);
            max_relative_drift[a] = max_relative_drift[a].max(if t0[a] == 0.0 { dr[a].abs() } else { rel });
        }
    }
    Ok(MassBalance {
        totals,
        drift,
        max_relative_drift,
    })
}

/// ‖φ_α^next - φ_α^prev‖_{V′} for the lumped covector m_i Δφ_α.
pub fn dual_increments(
    prev: &State,
    next: &State,
    spaces: &Spaces,
    dual: &DualNorm,
) -> Result<[f64; 2], DiagnosticsError> {
    let mut out = [0.0; 2];
    for (a, o) in out.iter_mut().enumerate() {
        let f: Vec<f64> = (0..spaces.num_vertices())
            .map(|i| spaces.lumped[i] * (next.content(a)[i] - prev.content(a)[i]))
            .collect();
        *o = dual.norm(&f)?;
    }
    Ok(out)
}

/// Measured constants with max_j F_j ≤ e^{C t_j}(F_0 + C′); recorded, never asserted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GronwallConstants {
    pub c: f64,
    pub c_prime: f64,
}

pub fn gronwall_constants(times: &[f64], energies: &[f64]) -> Option<GronwallConstants> {
    let (&f0, _) = energies.split_first()?;
    let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let c_prime = (-lo).max(0.0) + 1e-12 * (1.0 + f0.abs());
    let e0 = f0 + c_prime;
    let mut c = 0.0f64;
    for (t, f) in times.iter().zip(energies).skip(1) {
        if *t > 0.0 {
            c = c.max(((f + c_prime) / e0).ln() / t);
        }
    }
    Some(GronwallConstants { c, c_prime })
}
