//! Phase pressures, the potential-to-content map Φ_ε and its convex potential F_ε.

use serde::{Deserialize, Serialize};

use super::capillary::CapillaryLaw;
use super::error::{check_unit, ConstitutiveError};
use super::regularized::RegularizedModel;
use super::soft::{
    soft_constraint_g, soft_constraint_g_inv_with_derivative, soft_constraint_potential, PorosityBounds,
};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseContentPair {
    pub phi_n: f64,
    pub phi_w: f64,
}

impl PhaseContentPair {
    pub fn new(phi_n: f64, phi_w: f64) -> Self {
        Self { phi_n, phi_w }
    }

    pub fn phi(&self) -> f64 {
        self.phi_n + self.phi_w
    }

    /// s_n = φ_n/φ (0 for an empty pore space).
    pub fn s_n(&self) -> f64 {
        let phi = self.phi();
        if phi > 0.0 {
            (self.phi_n / phi).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    pub fn s_w(&self) -> f64 {
        1.0 - self.s_n()
    }

    pub fn in_k_phi(&self, bounds: &PorosityBounds) -> bool {
        self.phi_n >= 0.0 && self.phi_w >= 0.0 && bounds.contains(self.phi())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatPressures {
    pub p_n: f64,
    pub p_w: f64,
    /// true when s sits at a graph endpoint and a single value was selected
    pub selection: bool,
}

/// p̂_n = γ + (1-s)γ', p̂_w = γ - sγ'.
pub fn hat_pressures<L: CapillaryLaw + ?Sized>(model: &L, s: f64) -> Result<HatPressures, ConstitutiveError> {
    check_unit("s", s)?;
    let (g, g1, _) = model.gamma_eval(s)?;
    Ok(HatPressures {
        p_n: g + (1.0 - s) * g1,
        p_w: g - s * g1,
        selection: s == 0.0 || s == 1.0,
    })
}

pub fn saturation_from_capillary<L: CapillaryLaw + ?Sized>(model: &L, p: f64) -> f64 {
    model.saturation(p)
}

/// Φ_ε with its symmetric Jacobian d(φ_n, φ_w)/d(y_n, y_w).
pub fn phi_from_potentials_with_jacobian(
    reg: &RegularizedModel,
    bounds: &PorosityBounds,
    y_n: f64,
    y_w: f64,
) -> (PhaseContentPair, [[f64; 2]; 2]) {
    let eps = reg.eps();
    let (s, ds) = reg.saturation_with_derivative(y_n - y_w);
    let (g, _, _) = reg.eval_unchecked(s);
    let arg = s * y_n + (1.0 - s) * y_w - g;
    let (phi, dphi) = soft_constraint_g_inv_with_derivative(bounds, eps, arg);
    let sw = 1.0 - s;
    let c = phi * ds;
    let jac = [
        [dphi * s * s + c, dphi * s * sw - c],
        [dphi * s * sw - c, dphi * sw * sw + c],
    ];
    (PhaseContentPair::new(phi * s, phi * sw), jac)
}

/// Φ_ε(y_n, y_w) for the shifted potentials y_α = p_α - π.
pub fn phi_from_potentials(reg: &RegularizedModel, bounds: &PorosityBounds, y_n: f64, y_w: f64) -> PhaseContentPair {
    phi_from_potentials_with_jacobian(reg, bounds, y_n, y_w).0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FEps {
    pub value: f64,
    /// DF_ε; None on the porosity faces where G_ε diverges
    pub gradient: Option<[f64; 2]>,
    /// gradient is a selection of the subdifferential (s_n ∈ {0, 1})
    pub selection: bool,
}

/// F_ε(φ) = φ γ_ε(s_n) + 𝒢_ε(φ) on K_φ.
pub fn f_eps_energy(
    reg: &RegularizedModel,
    bounds: &PorosityBounds,
    pair: PhaseContentPair,
) -> Result<FEps, ConstitutiveError> {
    if !pair.in_k_phi(bounds) {
        return Err(ConstitutiveError::Domain {
            what: "content pair",
            value: pair.phi(),
            domain: "K_phi",
        });
    }
    let phi = pair.phi();
    let s = pair.s_n();
    let (g, g1, _) = reg.eval_unchecked(s);
    let value = phi * g + soft_constraint_potential(bounds, reg.eps(), phi)?;
    let gradient = if bounds.contains_strictly(phi) {
        let gphi = soft_constraint_g(bounds, reg.eps(), phi)?;
        Some([g + (1.0 - s) * g1 + gphi, g - s * g1 + gphi])
    } else {
        None
    };
    Ok(FEps {
        value,
        gradient,
        selection: s == 0.0 || s == 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::CapillaryModel;

    fn setup() -> (RegularizedModel, PorosityBounds) {
        let base = CapillaryModel::brooks_corey(1.0, 3.0).unwrap();
        (
            RegularizedModel::new(base, 0.01).unwrap(),
            PorosityBounds::new(0.1, 0.4).unwrap(),
        )
    }

    #[test]
    fn hat_pressure_examples() {
        let m = CapillaryModel::brooks_corey(1.0, 3.0).unwrap();
        let h = hat_pressures(&m, 7.0 / 8.0).unwrap();
        assert!((h.p_n - 11.0 / 8.0).abs() < 1e-14);
        assert!((h.p_w + 5.0 / 8.0).abs() < 1e-14);
        let h0 = hat_pressures(&m, 0.0).unwrap();
        assert_eq!((h0.p_n, h0.p_w), (1.0, 0.0));
        assert!(h0.selection);
        assert!(hat_pressures(&m, 1.0).is_err());
    }

    #[test]
    fn phi_examples() {
        let (r, b) = setup();
        let p = phi_from_potentials(&r, &b, 0.0, 0.0);
        assert_eq!(p.phi_n, 0.0);
        assert!((p.phi_w - 0.25).abs() < 1e-16);
        let p = phi_from_potentials(&r, &b, 2.0 - 5.0 / 8.0, -5.0 / 8.0);
        assert!((p.phi() - 0.25).abs() < 1e-14);
        assert!((p.phi_n - 0.21875).abs() < 1e-14);
    }

    #[test]
    fn energy_at_midpoint_vanishes() {
        let (r, b) = setup();
        let f = f_eps_energy(&r, &b, PhaseContentPair::new(0.0, 0.25)).unwrap();
        assert_eq!(f.value, 0.0);
        assert!(f.selection);
        assert!(f_eps_energy(&r, &b, PhaseContentPair::new(0.3, 0.3)).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let (r, b) = setup();
        let (y_n, y_w) = (1.7, 0.02);
        let (_, j) = phi_from_potentials_with_jacobian(&r, &b, y_n, y_w);
        let d = 1e-7;
        let fd = |dn: f64, dw: f64| {
            let p = phi_from_potentials(&r, &b, y_n + dn, y_w + dw);
            let m = phi_from_potentials(&r, &b, y_n - dn, y_w - dw);
            [(p.phi_n - m.phi_n) / (2.0 * d), (p.phi_w - m.phi_w) / (2.0 * d)]
        };
        let cn = fd(d, 0.0);
        let cw = fd(0.0, d);
        assert!((cn[0] - j[0][0]).abs() < 1e-6 * (1.0 + j[0][0].abs()));
        assert!((cn[1] - j[1][0]).abs() < 1e-6 * (1.0 + j[1][0].abs()));
        assert!((cw[0] - j[0][1]).abs() < 1e-6 * (1.0 + j[0][1].abs()));
        assert!((cw[1] - j[1][1]).abs() < 1e-6 * (1.0 + j[1][1].abs()));
    }
}
