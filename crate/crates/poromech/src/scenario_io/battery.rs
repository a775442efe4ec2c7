use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constitutive::{hat_pressures, phi_from_potentials, CapillaryLaw, RegularizedModel};
use crate::coupled::init_state;
use crate::diagnostics::energy_audit;
use crate::femcore::LuCache;
use crate::stepper::{eps_continuation, monotonicity_samples, FrozenData, FrozenSystem};

use super::config::Scenario;
use super::ScenarioError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            passed: value <= limit,
        }
    }

    fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            passed: value >= limit,
        }
    }
}

/// Property battery on a configured scenario: constitutive identities,
/// monotonicity samples and the energy audit of one step.
pub fn audit_battery(sc: &Scenario, samples: usize) -> Result<Vec<Check>, ScenarioError> {
    let mut rng = ChaCha8Rng::seed_from_u64(sc.run.seed);
    let model = &sc.capillary;
    let mut checks = Vec::new();

    let (mut diff, mut mean) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let s: f64 = rng.gen_range(1e-6..1.0 - 1e-6);
        let (g, g1, _) = model.gamma_eval(s)?;
        let hp = hat_pressures(model, s)?;
        diff = diff.max((hp.p_n - hp.p_w - g1).abs() / (1.0 + g1.abs()));
        mean = mean.max((s * hp.p_n + (1.0 - s) * hp.p_w - g).abs() / (1.0 + g.abs()));
    }
    checks.push(Check::at_most("hat pressure difference equals gamma'", diff, 1e-12));
    checks.push(Check::at_most(
        "saturation-weighted hat pressure equals gamma",
        mean,
        1e-12,
    ));

    let eps_final = *sc.controls.eps_schedule.last().expect("validated schedule is nonempty");
    let reg = RegularizedModel::new(model.clone(), eps_final)?;
    let bounds = &sc.params.bounds;
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let y1 = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let y2 = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let a = phi_from_potentials(&reg, bounds, y1[0], y1[1]);
        let b = phi_from_potentials(&reg, bounds, y2[0], y2[1]);
        worst = worst.min((a.phi_n - b.phi_n) * (y1[0] - y2[0]) + (a.phi_w - b.phi_w) * (y1[1] - y2[1]));
    }
    checks.push(Check::at_least("content map monotonicity (min pairing)", worst, -1e-12));

    let sp = &sc.spaces;
    let init = init_state(&sc.phi0, &sc.params, sp, &reg)?;
    let frozen = FrozenData::from_state(&init, &sc.params);
    let h = sc.controls.h;
    let sys = FrozenSystem::new(sp, &sc.params, &reg, &init, &frozen, h);
    let center = sys.unknowns_from_state(&init);
    let mono = monotonicity_samples(&sys, &center, samples.min(200), 0.5, sc.run.seed);
    checks.push(Check::at_most(
        "frozen map pairs below -1e-12 |dY|^2",
        mono.violations as f64,
        0.0,
    ));
    checks.push(Check::at_least("frozen map coercivity estimate", mono.coercivity, 0.0));

    let step = eps_continuation(&init, h, &sc.controls, &sc.params, sp, model, &mut LuCache::default())?;
    let audit = energy_audit(&init, &step.state, &step.frozen, h, &sc.params, sp, &reg)?;
    checks.push(Check::at_most(
        "tested-form identity defect (relative)",
        audit.identity_defect,
        1e-9,
    ));
    checks.push(Check::at_least(
        "convexity inequality residual (relative)",
        audit.inequality_residual / audit.energy_scale,
        -1e-8,
    ));
    Ok(checks)
}
