//! Fixed point on the frozen data, ε-continuation and the transient loop.

use serde::{Deserialize, Serialize};

use crate::constitutive::{CapillaryModel, RegularizedModel};
use crate::coupled::{MaterialParams, Spaces, State};
use crate::diagnostics::{graph_consistency, GraphReport};
use crate::femcore::LuCache;

use super::system::{FrozenData, FrozenSystem};
use super::{StepControls, StepperError};

const MIN_RELAX: f64 = 1.0 / 64.0;
/// floor of the displacement energy norm in the relative change
const U_FLOOR: f64 = 1e-6;

/// Output of one fixed-point solve at a fixed ε.
#[derive(Debug, Clone)]
pub struct FixedPointResult {
    pub state: State,
    /// frozen data of the accepted inner solve
    pub frozen: FrozenData,
    pub fp_iterations: usize,
    pub newton_iterations: usize,
    pub newton_residual: f64,
    pub boundary_flux: [f64; 2],
    pub change_history: Vec<f64>,
}

fn rel_l2(spaces: &Spaces, a: &State, tilde: &FrozenData) -> f64 {
    let m = &spaces.lumped;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..m.len() {
        let dn = a.phi_n[i] - tilde.tilde_phi[i].phi_n;
        let dw = a.phi_w[i] - tilde.tilde_phi[i].phi_w;
        num += m[i] * (dn * dn + dw * dw);
        den += m[i] * (a.phi_n[i].powi(2) + a.phi_w[i].powi(2));
    }
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

/// Relative change of (φ, u) between a solve output and its frozen input.
pub fn fixed_point_change(spaces: &Spaces, out: &State, frozen: &FrozenData) -> f64 {
    let du: Vec<f64> = out.u.iter().zip(&frozen.tilde_u).map(|(a, b)| a - b).collect();
    let num = spaces.energy_norm_sq(&du).max(0.0).sqrt();
    let den = spaces.energy_norm_sq(&out.u).max(0.0).sqrt().max(U_FLOOR);
    rel_l2(spaces, out, frozen) + num / den
}

/// Relaxed fixed point (φ̃, ũ) ← (1-ω)(φ̃, ũ) + ω(φ, u) around the frozen solve.
#[allow(clippy::too_many_arguments)]
pub fn fixed_point_step(
    prev: &State,
    warm: &State,
    reg: &RegularizedModel,
    h: f64,
    controls: &StepControls,
    params: &MaterialParams,
    spaces: &Spaces,
    cache: &mut LuCache,
) -> Result<FixedPointResult, StepperError> {
    controls.check_level(h, reg.eps())?;
    let mut frozen = FrozenData::from_state(warm, params);
    let mut start = warm.clone();
    let mut omega = controls.fp_relax;
    let mut history: Vec<f64> = Vec::new();
    let mut newton_total = 0;
    for k in 1..=controls.fp_max {
        let sys = FrozenSystem::new(spaces, params, reg, prev, &frozen, h);
        let y0 = sys.unknowns_from_state(&start);
        let (y, ev, rep) = sys.solve(y0, controls, cache)?;
        newton_total += rep.iterations;
        let out = sys.state_from(&y, &ev)?;
        let change = fixed_point_change(spaces, &out, &frozen);
        if change <= controls.fp_tol {
            history.push(change);
            let boundary_flux = sys.boundary_flux(&ev);
            return Ok(FixedPointResult {
                state: out,
                frozen,
                fp_iterations: k,
                newton_iterations: newton_total,
                newton_residual: rep.residual,
                boundary_flux,
                change_history: history,
            });
        }
        if history.last().is_some_and(|c| change > *c) {
            omega = (0.5 * omega).max(MIN_RELAX);
        }
        history.push(change);
        let raw: Vec<_> = (0..out.num_vertices())
            .map(|i| {
                let t = frozen.tilde_phi[i];
                crate::constitutive::PhaseContentPair::new(
                    (1.0 - omega) * t.phi_n + omega * out.phi_n[i],
                    (1.0 - omega) * t.phi_w + omega * out.phi_w[i],
                )
            })
            .collect();
        let u: Vec<f64> = frozen
            .tilde_u
            .iter()
            .zip(&out.u)
            .map(|(a, b)| (1.0 - omega) * a + omega * b)
            .collect();
        frozen = FrozenData::new(&raw, u, params);
        start = out;
    }
    Err(StepperError::FixedPointNotConverged {
        iterations: controls.fp_max,
        history,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub eps: f64,
    pub fp_iterations: usize,
    pub newton_iterations: usize,
    pub newton_residual: f64,
    pub graph: GraphReport,
}

#[derive(Debug, Clone)]
pub struct ContinuationResult {
    pub state: State,
    pub frozen: FrozenData,
    pub levels: Vec<LevelRecord>,
    pub boundary_flux: [f64; 2],
}

/// Runs the fixed point at every ε of the schedule, warm-starting each level.
pub fn eps_continuation(
    prev: &State,
    h: f64,
    controls: &StepControls,
    params: &MaterialParams,
    spaces: &Spaces,
    base: &CapillaryModel,
    cache: &mut LuCache,
) -> Result<ContinuationResult, StepperError> {
    if controls.eps_schedule.is_empty() {
        return Err(StepperError::InvalidControls("empty eps schedule".into()));
    }
    let mut levels = Vec::with_capacity(controls.eps_schedule.len());
    let mut warm = prev.clone();
    let mut last = None;
    for &eps in &controls.eps_schedule {
        let reg = RegularizedModel::new(base.clone(), eps)?;
        let res = fixed_point_step(prev, &warm, &reg, h, controls, params, spaces, cache).map_err(|e| {
            StepperError::LevelFailed {
                eps,
                completed: levels.iter().map(|l: &LevelRecord| l.eps).collect(),
                source: Box::new(e),
            }
        })?;
        levels.push(LevelRecord {
            eps,
            fp_iterations: res.fp_iterations,
            newton_iterations: res.newton_iterations,
            newton_residual: res.newton_residual,
            graph: graph_consistency(&res.state, &params.bounds),
        });
        warm = res.state.clone();
        last = Some(res);
    }
    let last = last.expect("schedule is nonempty");
    Ok(ContinuationResult {
        state: last.state,
        frozen: last.frozen,
        levels,
        boundary_flux: last.boundary_flux,
    })
}

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub frozen: FrozenData,
    pub levels: Vec<LevelRecord>,
    pub boundary_flux: [f64; 2],
}

impl StepRecord {
    pub fn newton_iterations(&self) -> usize {
        self.levels.iter().map(|l| l.newton_iterations).sum()
    }

    pub fn fp_iterations(&self) -> usize {
        self.levels.iter().map(|l| l.fp_iterations).sum()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub records: Vec<StepRecord>,
}

#[derive(Debug)]
pub struct TransientOutcome {
    pub trajectory: Trajectory,
    /// set when a step failed; the trajectory holds every completed step
    pub failure: Option<StepperError>,
}

/// Backward-Euler loop; `on_step(record, prev, next)` runs after every accepted step.
pub fn run_transient(
    init: State,
    n_steps: usize,
    controls: &StepControls,
    params: &MaterialParams,
    spaces: &Spaces,
    base: &CapillaryModel,
    mut on_step: impl FnMut(&StepRecord, &State, &State),
) -> TransientOutcome {
    let mut traj = Trajectory {
        states: vec![init],
        records: Vec::new(),
    };
    if let Err(e) = controls.validate() {
        return TransientOutcome {
            trajectory: traj,
            failure: Some(e),
        };
    }
    let mut cache = LuCache::default();
    for j in 1..=n_steps {
        let prev = traj.states.last().expect("trajectory holds the initial state");
        match eps_continuation(prev, controls.h, controls, params, spaces, base, &mut cache) {
            Ok(res) => {
                let rec = StepRecord {
                    step: j,
                    t: j as f64 * controls.h,
                    frozen: res.frozen,
                    levels: res.levels,
                    boundary_flux: res.boundary_flux,
                };
                on_step(&rec, prev, &res.state);
                traj.records.push(rec);
                traj.states.push(res.state);
            }
            Err(e) => {
                return TransientOutcome {
                    trajectory: traj,
                    failure: Some(StepperError::StepFailed {
                        step: j,
                        source: Box::new(e),
                    }),
                }
            }
        }
    }
    TransientOutcome {
        trajectory: traj,
        failure: None,
    }
}
