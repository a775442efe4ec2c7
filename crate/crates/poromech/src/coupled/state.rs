use serde::{Deserialize, Serialize};

use crate::constitutive::PhaseContentPair;

use super::params::MaterialParams;
use super::spaces::Spaces;

/// Nodal state (φ_n, φ_w, u, θ, π) with the multiplier χ and phase pressures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub phi_n: Vec<f64>,
    pub phi_w: Vec<f64>,
    /// all displacement dofs, vertex-major
    pub u: Vec<f64>,
    pub theta: Vec<f64>,
    pub pi: Vec<f64>,
    pub chi: Vec<f64>,
    pub p_n: Vec<f64>,
    pub p_w: Vec<f64>,
    pub eps: f64,
}

impl State {
    pub fn num_vertices(&self) -> usize {
        self.phi_n.len()
    }

    pub fn pair(&self, i: usize) -> PhaseContentPair {
        PhaseContentPair::new(self.phi_n[i], self.phi_w[i])
    }

    pub fn pairs(&self) -> Vec<PhaseContentPair> {
        (0..self.num_vertices()).map(|i| self.pair(i)).collect()
    }

    pub fn porosity(&self) -> Vec<f64> {
        self.phi_n.iter().zip(&self.phi_w).map(|(a, b)| a + b).collect()
    }

    pub fn pressure(&self, alpha: usize) -> &[f64] {
        if alpha == 0 {
            &self.p_n
        } else {
            &self.p_w
        }
    }

    pub fn content(&self, alpha: usize) -> &[f64] {
        if alpha == 0 {
            &self.phi_n
        } else {
            &self.phi_w
        }
    }

    /// max_i |φ_i - (b div u)_i - θ_i - φ_r,i| with the lumped nodal divergence.
    pub fn constraint_violation(&self, spaces: &Spaces, params: &MaterialParams) -> f64 {
        let div = spaces.lumped_div(&self.u);
        (0..self.num_vertices())
            .map(|i| (self.phi_n[i] + self.phi_w[i] - div[i] - self.theta[i] - params.phi_r[i]).abs())
            .fold(0.0, f64::max)
    }

    /// max_i |π_i - Mθ_i|.
    pub fn pi_theta_violation(&self, params: &MaterialParams) -> f64 {
        self.pi
            .iter()
            .zip(&self.theta)
            .map(|(p, t)| (p - params.biot_m * t).abs())
            .fold(0.0, f64::max)
    }
}
