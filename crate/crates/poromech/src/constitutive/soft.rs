//! Porosity bounds, the soft constraint G_ε and the mobility floor k_ε.

use serde::{Deserialize, Serialize};

use super::error::ConstitutiveError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PorosityBounds {
    pub phi_lo: f64,
    pub phi_hi: f64,
}

impl PorosityBounds {
    pub fn new(phi_lo: f64, phi_hi: f64) -> Result<Self, ConstitutiveError> {
        if !(phi_lo > 0.0 && phi_lo < phi_hi && phi_hi < 1.0) {
            return Err(ConstitutiveError::InvalidModel(format!(
                "porosity bounds must satisfy 0 < lo < hi < 1, got ({phi_lo}, {phi_hi})"
            )));
        }
        Ok(Self { phi_lo, phi_hi })
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.phi_lo + self.phi_hi)
    }

    pub fn width(&self) -> f64 {
        self.phi_hi - self.phi_lo
    }

    pub fn contains(&self, phi: f64) -> bool {
        phi >= self.phi_lo && phi <= self.phi_hi
    }

    pub fn contains_strictly(&self, phi: f64) -> bool {
        phi > self.phi_lo && phi < self.phi_hi
    }
}

/// G_ε(φ) = ε ln((φ - φ♭)/(φ♯ - φ)).
pub fn soft_constraint_g(bounds: &PorosityBounds, eps: f64, phi: f64) -> Result<f64, ConstitutiveError> {
    if !bounds.contains_strictly(phi) {
        return Err(ConstitutiveError::Domain {
            what: "phi",
            value: phi,
            domain: "(phi_lo, phi_hi)",
        });
    }
    let half = 0.5 * bounds.width();
    let x = phi - bounds.mid();
    Ok(eps * ((half + x) / (half - x)).ln())
}

/// G_ε'(φ) = ε (φ♯ - φ♭) / ((φ - φ♭)(φ♯ - φ)).
pub fn soft_constraint_g_prime(bounds: &PorosityBounds, eps: f64, phi: f64) -> f64 {
    eps * bounds.width() / ((phi - bounds.phi_lo) * (bounds.phi_hi - phi))
}

fn logistic(x: f64) -> (f64, f64) {
    // returns (σ(x), σ(-x)) without overflow
    if x >= 0.0 {
        let e = (-x).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = x.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    }
}

/// Inverse of G_ε together with dφ/dχ = 1/G_ε'(φ).
pub fn soft_constraint_g_inv_with_derivative(bounds: &PorosityBounds, eps: f64, chi: f64) -> (f64, f64) {
    let (sp, sm) = logistic(chi / eps);
    let w = bounds.width();
    let x = chi / eps;
    let mut phi = if x.abs() < 1.0 {
        bounds.mid() + 0.5 * w * (0.5 * x).tanh()
    } else if sp <= 0.5 {
        bounds.phi_lo + w * sp
    } else {
        bounds.phi_hi - w * sm
    };
    if phi <= bounds.phi_lo {
        phi = bounds.phi_lo.next_up();
    }
    if phi >= bounds.phi_hi {
        phi = bounds.phi_hi.next_down();
    }
    (phi, w * sp * sm / eps)
}

pub fn soft_constraint_g_inv(bounds: &PorosityBounds, eps: f64, chi: f64) -> f64 {
    soft_constraint_g_inv_with_derivative(bounds, eps, chi).0
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// 𝒢_ε(z) = ∫_{mid}^{z} G_ε, finite on the closed interval.
pub fn soft_constraint_potential(bounds: &PorosityBounds, eps: f64, z: f64) -> Result<f64, ConstitutiveError> {
    if !bounds.contains(z) {
        return Err(ConstitutiveError::Domain {
            what: "phi",
            value: z,
            domain: "[phi_lo, phi_hi]",
        });
    }
    let h = |x: f64| xlogx(x - bounds.phi_lo) + xlogx(bounds.phi_hi - x);
    Ok(eps * (h(z) - h(bounds.mid())))
}

/// k_ε(s) = max(ε, s).
pub fn mobility_floor(eps: f64, s: f64) -> f64 {
    eps.max(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> PorosityBounds {
        PorosityBounds::new(0.1, 0.4).unwrap()
    }

    #[test]
    fn g_examples() {
        assert_eq!(soft_constraint_g(&b(), 0.01, 0.25).unwrap(), 0.0);
        let v = soft_constraint_g(&b(), 0.01, 0.3).unwrap();
        assert!((v - 0.01 * 2f64.ln()).abs() < 1e-15);
        assert!(soft_constraint_g(&b(), 0.01, 0.4).is_err());
    }

    #[test]
    fn g_inverse_examples() {
        assert!((soft_constraint_g_inv(&b(), 0.01, 0.0) - 0.25).abs() < 1e-16);
        assert!((soft_constraint_g_inv(&b(), 0.01, 0.0069315) - 0.3).abs() < 1e-6);
        assert!((soft_constraint_g_inv(&b(), 0.01, 0.01 * 2f64.ln()) - 0.3).abs() < 1e-15);
        for chi in [-1e6, -50.0, 50.0, 1e6] {
            let p = soft_constraint_g_inv(&b(), 0.01, chi);
            assert!(p > 0.1 && p < 0.4);
        }
    }

    #[test]
    fn g_inverse_roundtrip() {
        for i in 1..100 {
            let phi = 0.1 + 0.3 * i as f64 / 100.0;
            let chi = soft_constraint_g(&b(), 0.01, phi).unwrap();
            assert!((soft_constraint_g_inv(&b(), 0.01, chi) - phi).abs() < 1e-12);
        }
    }

    #[test]
    fn potential_anchored_at_mid() {
        assert_eq!(soft_constraint_potential(&b(), 0.1, 0.25).unwrap(), 0.0);
        assert!(soft_constraint_potential(&b(), 0.1, 0.1).unwrap() > 0.0);
        assert!(soft_constraint_potential(&b(), 0.1, 0.45).is_err());
    }

    #[test]
    fn mobility_examples() {
        assert_eq!(mobility_floor(0.1, 0.05), 0.1);
        assert_eq!(mobility_floor(0.1, 0.5), 0.5);
    }
}
