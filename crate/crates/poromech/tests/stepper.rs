mod common;

use std::sync::Arc;

use common::*;
use poromech::constitutive::{PhaseContentPair, RegularizedModel};
use poromech::coupled::{init_state, MaterialParams, Spaces, State};
use poromech::femcore::{generate_mesh, LuCache, MeshSpec};
use poromech::stepper::*;
use proptest::prelude::*;

const EPS: f64 = 1e-2;

fn controls() -> StepControls {
    StepControls {
        eps_schedule: vec![EPS],
        ..StepControls::default()
    }
}

fn setup(n: usize, pair: PhaseContentPair) -> (MaterialParams, Spaces, State) {
    let p = params((n + 1) * (n + 1));
    let sp = square(n, &p);
    let reg = RegularizedModel::new(bc13(), EPS).unwrap();
    let st = init_state(&vec![pair; sp.num_vertices()], &p, &sp, &reg).unwrap();
    (p, sp, st)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn equilibrium_is_a_fixed_point() {
    let (p, sp, st) = setup(6, PhaseContentPair::new(0.21875, 0.03125));
    let reg = RegularizedModel::new(bc13(), EPS).unwrap();
    let mut cache = LuCache::default();
    let res = fixed_point_step(&st, &st, &reg, 0.01, &controls(), &p, &sp, &mut cache).unwrap();
    assert!(res.fp_iterations <= 2, "{}", res.fp_iterations);
    assert!(max_diff(&res.state.phi_n, &st.phi_n) < 1e-12);
    assert!(max_diff(&res.state.phi_w, &st.phi_w) < 1e-12);
    assert!(max_diff(&res.state.u, &st.u) < 1e-12);
}

#[test]
fn zero_steps_returns_initial_state() {
    let (p, sp, st) = setup(4, PhaseContentPair::new(0.0, 0.25));
    let out = run_transient(st.clone(), 0, &controls(), &p, &sp, &bc13(), |_, _, _| {
        panic!("no steps")
    });
    assert!(out.failure.is_none());
    assert!(out.trajectory.records.is_empty());
    assert_eq!(out.trajectory.states, vec![st]);
}

#[test]
fn invalid_controls_fail_before_stepping() {
    let (p, sp, st) = setup(4, PhaseContentPair::new(0.0, 0.25));
    let c = StepControls {
        eps_schedule: vec![1e-3, 1e-2],
        ..controls()
    };
    let out = run_transient(st, 3, &c, &p, &sp, &bc13(), |_, _, _| {});
    assert!(matches!(out.failure, Some(StepperError::InvalidControls(_))));
    assert_eq!(out.trajectory.states.len(), 1);
}

#[test]
fn smallness_caps() {
    let c = controls();
    assert!(c.check_level(0.01, 0.1).is_ok());
    assert!(matches!(
        c.check_level(0.2, 0.01),
        Err(StepperError::SmallnessViolated(_))
    ));
    assert!(matches!(
        c.check_level(0.1, 0.25),
        Err(StepperError::SmallnessViolated(_))
    ));
}

#[test]
fn drainage_steps_converge() {
    let (p, sp, st) = setup(4, PhaseContentPair::new(0.0, 0.25));
    let c = controls();
    let mut seen = 0;
    let out = run_transient(st, 2, &c, &p, &sp, &bc13(), |rec, prev, next| {
        seen += 1;
        assert_eq!(rec.step, seen);
        assert!(rec.levels.iter().all(|l| l.newton_residual <= c.newton_tol));
        assert!(next.pairs().iter().all(|q| q.in_k_phi(&p.bounds)));
        assert_ne!(prev.phi_n, next.phi_n);
    });
    assert!(out.failure.is_none(), "{:?}", out.failure);
    assert_eq!(seen, 2);
    assert!((out.trajectory.records[1].t - 0.02).abs() < 1e-15);
}

#[test]
fn frozen_solve_is_unique() {
    let (p, sp, st) = setup(4, PhaseContentPair::new(0.0, 0.25));
    let reg = RegularizedModel::new(bc13(), EPS).unwrap();
    let frozen = FrozenData::from_state(&st, &p);
    let sys = FrozenSystem::new(&sp, &p, &reg, &st, &frozen, 0.01);
    let l = sys.layout();
    assert_eq!(l.len(), 2 * l.nf + l.nu + 2 * l.nv);
    let mut cache = LuCache::default();
    let y0 = sys.unknowns_from_state(&st);
    let (ya, _, ra) = sys.solve(y0.clone(), &controls(), &mut cache).unwrap();
    let shifted: Vec<f64> = y0
        .iter()
        .enumerate()
        .map(|(k, v)| v + 0.3 * ((k % 7) as f64 - 3.0))
        .collect();
    // far starts need more damped steps than the default cap
    let far = StepControls {
        newton_max: 200,
        ..controls()
    };
    let (yb, _, rb) = sys.solve(shifted, &far, &mut cache).unwrap();
    assert!(ra.residual <= 1e-10 && rb.residual <= 1e-10);
    assert!(max_diff(&ya, &yb) < 1e-7, "{}", max_diff(&ya, &yb));
}

#[test]
fn frozen_map_sampled_monotone() {
    let (p, sp, st) = setup(4, PhaseContentPair::new(0.1, 0.15));
    let reg = RegularizedModel::new(bc13(), EPS).unwrap();
    let frozen = FrozenData::from_state(&st, &p);
    let sys = FrozenSystem::new(&sp, &p, &reg, &st, &frozen, 0.01);
    let c = sys.unknowns_from_state(&st);
    let rep = monotonicity_samples(&sys, &c, 50, 0.5, 3);
    assert_eq!(rep.violations, 0);
    assert!(rep.coercivity > 0.0);
    assert_eq!(rep, monotonicity_samples(&sys, &c, 50, 0.5, 3));
}

#[test]
fn linear_biot_without_loads_stays_at_rest() {
    let m = Arc::new(
        generate_mesh(&MeshSpec::Rectangle {
            nx: 4,
            ny: 4,
            lx: 1.0,
            ly: 1.0,
        })
        .unwrap(),
    );
    let nv = m.num_vertices();
    let all: Vec<String> = ["bottom", "right", "top", "left"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let par = LinearBiotParams {
        lame_mu: 1.0,
        lame_lambda: 1.0,
        biot_b: 1.0,
        biot_m: 1.0,
        kappa: 1.0,
    };
    let z = |n| vec![0.0; n];
    let (pp, u) = linear_biot_step(m, &all, &all, &par, 0.1, &z(nv), &z(2 * nv), &z(nv), &z(2 * nv)).unwrap();
    assert!(pp.iter().chain(&u).all(|v| *v == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schedule_validation(a in 1e-4f64..0.5, b in 1e-4f64..0.5) {
        let c = StepControls { eps_schedule: vec![a, b], ..StepControls::default() };
        let ok = a <= 0.25 && b <= 0.25 && b < a;
        prop_assert_eq!(c.validate().is_ok(), ok);
    }
}
