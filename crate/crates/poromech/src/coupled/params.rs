use serde::{Deserialize, Serialize};

use crate::constitutive::PorosityBounds;

use super::CoupledError;

/// Porosity-to-permeability law (isotropic).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PermeabilityLaw {
    /// K₀ φ³/(1-φ)²
    KozenyCarman {
        k0: f64,
    },
    Constant {
        k0: f64,
    },
}

impl PermeabilityLaw {
    pub fn k0(&self) -> f64 {
        match *self {
            Self::KozenyCarman { k0 } | Self::Constant { k0 } => k0,
        }
    }

    pub fn eval_unchecked(&self, phi: f64) -> f64 {
        match *self {
            Self::KozenyCarman { k0 } => k0 * phi.powi(3) / ((1.0 - phi) * (1.0 - phi)),
            Self::Constant { k0 } => k0,
        }
    }

    /// (K♭, K♯) over the porosity bounds.
    pub fn bounds(&self, b: &PorosityBounds) -> (f64, f64) {
        (self.eval_unchecked(b.phi_lo), self.eval_unchecked(b.phi_hi))
    }
}

/// Material data; nodal fields are indexed by mesh vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialParams {
    pub viscosity_n: f64,
    pub viscosity_w: f64,
    pub density_n: f64,
    pub density_w: f64,
    pub gravity: [f64; 2],
    pub lame_mu: f64,
    pub lame_lambda: f64,
    pub biot_b: f64,
    pub biot_m: f64,
    pub bounds: PorosityBounds,
    pub permeability: PermeabilityLaw,
    pub phi_r: Vec<f64>,
    pub rho_sr: Vec<f64>,
    pub f_ext: Vec<[f64; 2]>,
    /// Dirichlet pressure liftings p^D_n, p^D_w (time independent)
    pub p_dirichlet: [Vec<f64>; 2],
}

impl MaterialParams {
    pub fn viscosity(&self, alpha: usize) -> f64 {
        [self.viscosity_n, self.viscosity_w][alpha]
    }

    pub fn density(&self, alpha: usize) -> f64 {
        [self.density_n, self.density_w][alpha]
    }

    pub fn mu_max(&self) -> f64 {
        self.viscosity_n.max(self.viscosity_w)
    }

    pub fn mu_min(&self) -> f64 {
        self.viscosity_n.min(self.viscosity_w)
    }

    /// Checks sizes and the pointwise clauses; `nv` is the vertex count.
    pub fn check(&self, nv: usize) -> Result<(), CoupledError> {
        let bad = |m: String| Err(CoupledError::InvalidParams(m));
        for (name, v) in [
            ("viscosity_n", self.viscosity_n),
            ("viscosity_w", self.viscosity_w),
            ("density_n", self.density_n),
            ("density_w", self.density_w),
            ("lame_mu", self.lame_mu),
            ("lame_lambda", self.lame_lambda),
            ("biot_m", self.biot_m),
            ("permeability k0", self.permeability.k0()),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.biot_b > 0.0 && self.biot_b <= 1.0) {
            return bad(format!("biot_b must lie in (0, 1], got {}", self.biot_b));
        }
        if self.phi_r.len() != nv || self.rho_sr.len() != nv || self.f_ext.len() != nv {
            return bad("nodal material fields do not match the mesh".into());
        }
        if self.p_dirichlet.iter().any(|p| p.len() != nv) {
            return bad("Dirichlet pressure fields do not match the mesh".into());
        }
        if let Some((i, v)) = self.phi_r.iter().enumerate().find(|(_, v)| !self.bounds.contains(**v)) {
            return bad(format!("phi_r = {v} at vertex {i} lies outside the porosity bounds"));
        }
        Ok(())
    }
}

/// K(φ), failing outside the porosity bounds.
pub fn permeability(phi: f64, params: &MaterialParams) -> Result<f64, CoupledError> {
    if !params.bounds.contains(phi) {
        return Err(CoupledError::OutOfBounds {
            what: "porosity",
            index: 0,
            value: phi,
        });
    }
    Ok(params.permeability.eval_unchecked(phi))
}
