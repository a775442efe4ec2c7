use serde::{Deserialize, Serialize};

use crate::constitutive::PorosityBounds;
use crate::coupled::State;

pub const SIGN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphReport {
    pub max_distance: f64,
    pub sign_violations: usize,
    /// vertex attaining the maximum
    pub argmax: usize,
}

/// Distance of (φ, χ) to the graph of the subdifferential of the indicator of [φ♭, φ♯].
pub fn graph_distance(phi: f64, chi: f64, bounds: &PorosityBounds) -> f64 {
    let delta = bounds.width() / 100.0;
    let lo = (phi - bounds.phi_lo).hypot(chi.max(0.0));
    let hi = (phi - bounds.phi_hi).hypot(chi.min(0.0));
    let mut d = lo.min(hi);
    if phi >= bounds.phi_lo + delta && phi <= bounds.phi_hi - delta {
        d = d.min(chi.abs());
    }
    d
}

pub fn graph_consistency(state: &State, bounds: &PorosityBounds) -> GraphReport {
    let delta = bounds.width() / 100.0;
    let mut rep = GraphReport {
        max_distance: 0.0,
        sign_violations: 0,
        argmax: 0,
    };
    for (i, chi) in state.chi.iter().enumerate() {
        let phi = state.phi_n[i] + state.phi_w[i];
        let d = graph_distance(phi, *chi, bounds);
        if d > rep.max_distance {
            rep.max_distance = d;
            rep.argmax = i;
        }
        let near_lo = phi < bounds.phi_lo + delta;
        let near_hi = phi > bounds.phi_hi - delta;
        if (*chi < -SIGN_TOL && !near_lo) || (*chi > SIGN_TOL && !near_hi) {
            rep.sign_violations += 1;
        }
    }
    rep
}
