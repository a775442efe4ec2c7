//! Backward-Euler steps: frozen Newton solve, fixed point, ε-continuation.

mod linear;
mod outer;
mod probe;
mod system;

pub use linear::{linear_biot_step, LinearBiotParams};
pub use outer::{
    eps_continuation, fixed_point_change, fixed_point_step, run_transient, ContinuationResult, FixedPointResult,
    LevelRecord, StepRecord, Trajectory, TransientOutcome,
};
pub use probe::{monotonicity_samples, MonotonicityReport};
pub use system::{frozen_cell_data, CellData, Evaluation, FrozenData, FrozenSystem, Layout, NewtonReport};

use serde::{Deserialize, Serialize};

use crate::constitutive::ConstitutiveError;
use crate::coupled::CoupledError;
use crate::femcore::FemError;

#[derive(Debug, thiserror::Error)]
pub enum StepperError {
    #[error("Newton did not converge after {iterations} iterations (best residual {best:e})")]
    NewtonNotConverged {
        best: f64,
        iterations: usize,
        trace: Vec<f64>,
    },
    #[error("fixed point did not converge after {iterations} iterations (last change {:e})", history.last().copied().unwrap_or(f64::NAN))]
    FixedPointNotConverged { iterations: usize, history: Vec<f64> },
    #[error("invalid step controls: {0}")]
    InvalidControls(String),
    #[error("smallness cap violated: {0}")]
    SmallnessViolated(String),
    #[error("eps level {eps} failed (completed levels {completed:?}): {source}")]
    LevelFailed {
        eps: f64,
        completed: Vec<f64>,
        source: Box<StepperError>,
    },
    #[error("step {step} failed: {source}")]
    StepFailed { step: usize, source: Box<StepperError> },
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Constitutive(#[from] ConstitutiveError),
    #[error(transparent)]
    Coupled(#[from] CoupledError),
}

/// Time step, ε schedule and solver tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepControls {
    #[serde(rename = "h_s")]
    pub h: f64,
    pub eps_schedule: Vec<f64>,
    pub newton_tol: f64,
    pub newton_max: usize,
    pub fp_tol: f64,
    pub fp_max: usize,
    pub fp_relax: f64,
    pub h_max: f64,
    pub h_eps2_max: f64,
    pub polish: bool,
}

impl Default for StepControls {
    fn default() -> Self {
        Self {
            h: 0.01,
            eps_schedule: vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3],
            newton_tol: 1e-10,
            newton_max: 50,
            fp_tol: 1e-8,
            fp_max: 100,
            fp_relax: 1.0,
            h_max: 0.1,
            h_eps2_max: 1e-3,
            polish: true,
        }
    }
}

impl StepControls {
    pub fn validate(&self) -> Result<(), StepperError> {
        let bad = |m: String| Err(StepperError::InvalidControls(m));
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("h = {} must be positive", self.h));
        }
        if self.eps_schedule.is_empty() {
            return bad("eps schedule is empty".into());
        }
        for e in &self.eps_schedule {
            if !(*e > 0.0 && *e <= 0.25) {
                return bad(format!("eps = {e} outside (0, 1/4]"));
            }
        }
        if self.eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
            return bad("eps schedule must be strictly decreasing".into());
        }
        if !(self.newton_tol > 0.0) || !(self.fp_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.newton_max == 0 || self.fp_max == 0 {
            return bad("iteration caps must be positive".into());
        }
        if !(self.fp_relax > 0.0 && self.fp_relax <= 1.0) {
            return bad(format!("fp_relax = {} outside (0, 1]", self.fp_relax));
        }
        if !(self.h_max > 0.0) || !(self.h_eps2_max > 0.0) {
            return bad("smallness caps must be positive".into());
        }
        Ok(())
    }

    /// Asserts the configured smallness caps for one ε level.
    pub fn check_level(&self, h: f64, eps: f64) -> Result<(), StepperError> {
        if h > self.h_max {
            return Err(StepperError::SmallnessViolated(format!(
                "h = {h} exceeds h_max = {}",
                self.h_max
            )));
        }
        let v = h * eps * eps;
        if v > self.h_eps2_max * (1.0 + 1e-12) {
            return Err(StepperError::SmallnessViolated(format!(
                "h eps^2 = {v:e} exceeds {}",
                self.h_eps2_max
            )));
        }
        Ok(())
    }

    /// Largest ratio h/h_max or hε²/(hε²)_max over the schedule.
    pub fn smallness_load(&self) -> f64 {
        let e0 = self.eps_schedule.first().copied().unwrap_or(0.0);
        (self.h / self.h_max).max(self.h * e0 * e0 / self.h_eps2_max)
    }
}
