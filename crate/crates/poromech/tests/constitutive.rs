mod common;

use common::*;
use poromech::constitutive::*;
use proptest::prelude::*;

fn bounds() -> PorosityBounds {
    PorosityBounds::new(0.1, 0.4).unwrap()
}

#[test]
fn brooks_corey_values() {
    let m = bc13();
    let (g, g1, g2) = m.gamma_eval(0.0).unwrap();
    assert_eq!((g, g1), (0.0, 1.0));
    assert!((g2 - 1.0 / 3.0).abs() < 1e-15);
    let (g, g1, g2) = m.gamma_eval(7.0 / 8.0).unwrap();
    assert!((g - 9.0 / 8.0).abs() < 1e-14);
    assert!((g1 - 2.0).abs() < 1e-14);
    assert!((g2 - 16.0 / 3.0).abs() < 1e-13);
    assert!(m.gamma_eval(1.0).is_err());
    assert!(m.gamma_eval(-0.1).is_err());
}

#[test]
fn regularization_inactive_inside_clamp() {
    let reg = RegularizedModel::new(bc13(), 0.01).unwrap();
    let a = reg.gamma_eval(7.0 / 8.0).unwrap();
    let b = bc13().gamma_eval(7.0 / 8.0).unwrap();
    assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12 && (a.2 - b.2).abs() < 1e-12);
    assert!(RegularizedModel::new(bc13(), 0.3).is_err());
    assert!(RegularizedModel::new(bc13(), 0.0).is_err());
}

#[test]
fn hat_pressure_examples() {
    let m = bc13();
    let hp = hat_pressures(&m, 7.0 / 8.0).unwrap();
    assert!((hp.p_n - 11.0 / 8.0).abs() < 1e-14 && (hp.p_w + 5.0 / 8.0).abs() < 1e-14);
    let hp = hat_pressures(&m, 0.0).unwrap();
    assert_eq!((hp.p_n, hp.p_w), (1.0, 0.0));
    assert!(hp.selection);
}

#[test]
fn kirchhoff_values() {
    let m = bc13();
    assert_eq!(kirchhoff_eval(&m, 0.0).unwrap(), (0.0, 0.0));
    assert!((psi(&m, 1.0).unwrap() - 0.3).abs() < 1e-12);
    assert!((psi_by_quadrature(&m, 1.0).unwrap() - 0.3).abs() < 1e-10);
    // (1/3) B(3/2, 1/6) through the gamma function
    let beta = statrs::function::gamma::gamma(1.5) * statrs::function::gamma::gamma(1.0 / 6.0)
        / statrs::function::gamma::gamma(5.0 / 3.0);
    assert!((xi(&m, 1.0).unwrap() - beta / 3.0).abs() < 1e-9);
}

#[test]
fn saturation_examples() {
    let m = bc13();
    assert_eq!(saturation_from_capillary(&m, 0.5), 0.0);
    assert!((saturation_from_capillary(&m, 2.0) - 7.0 / 8.0).abs() < 1e-12);
    let reg = RegularizedModel::new(bc13(), 0.01).unwrap();
    let top = reg.gamma_prime_end();
    assert_eq!(saturation_from_capillary(&reg, top), 1.0);
    assert_eq!(saturation_from_capillary(&reg, top + 5.0), 1.0);
}

#[test]
fn soft_constraint_examples() {
    let b = bounds();
    assert_eq!(soft_constraint_g(&b, 0.01, 0.25).unwrap(), 0.0);
    let chi = soft_constraint_g(&b, 0.01, 0.3).unwrap();
    assert!((chi - 0.01 * 2f64.ln()).abs() < 1e-15);
    assert!((soft_constraint_g_inv(&b, 0.01, 0.0069315) - 0.3).abs() < 1e-6);
    assert!((soft_constraint_g_inv(&b, 0.01, 0.01 * 2f64.ln()) - 0.3).abs() < 1e-12);
    assert!(soft_constraint_g(&b, 0.01, 0.1).is_err());
    assert!(soft_constraint_g(&b, 0.01, 0.45).is_err());
    let hi = soft_constraint_g_inv(&b, 0.01, 1e6);
    let lo = soft_constraint_g_inv(&b, 0.01, -1e6);
    assert!(hi <= 0.4 && lo >= 0.1);
}

#[test]
fn mobility_floor_examples() {
    assert_eq!(mobility_floor(0.1, 0.05), 0.1);
    assert_eq!(mobility_floor(0.1, 0.5), 0.5);
}

#[test]
fn content_map_examples() {
    let reg = RegularizedModel::new(bc13(), 0.01).unwrap();
    let b = bounds();
    let p = phi_from_potentials(&reg, &b, 0.0, 0.0);
    assert_eq!(p.phi_n, 0.0);
    assert!((p.phi_w - 0.25).abs() < 1e-15);
    let p = phi_from_potentials(&reg, &b, 2.0 - 5.0 / 8.0, -5.0 / 8.0);
    assert!((p.phi() - 0.25).abs() < 1e-12);
    assert!((p.phi_n - 0.21875).abs() < 1e-12);
}

#[test]
fn f_eps_at_midpoint_and_outside() {
    let reg = RegularizedModel::new(bc13(), 0.01).unwrap();
    let b = bounds();
    let v = f_eps_energy(&reg, &b, PhaseContentPair::new(0.0, 0.25)).unwrap();
    assert!(v.value.abs() < 1e-15);
    assert!(f_eps_energy(&reg, &b, PhaseContentPair::new(0.3, 0.3)).is_err());
}

#[test]
fn projection_examples() {
    let b = bounds();
    let p = project_k_phi(PhaseContentPair::new(0.15, 0.1), &b);
    assert_eq!((p.phi_n, p.phi_w), (0.15, 0.1));
    let p = project_k_phi(PhaseContentPair::new(0.3, 0.3), &b);
    assert!((p.phi_n - 0.2).abs() < 1e-15 && (p.phi_w - 0.2).abs() < 1e-15);
    let p = project_k_phi(PhaseContentPair::new(-0.1, 0.2), &b);
    assert_eq!((p.phi_n, p.phi_w), (0.0, 0.2));
}

/// Nearest point of K_φ on a fine grid.
fn brute_projection(x: [f64; 2], b: &PorosityBounds) -> [f64; 2] {
    let n = 800;
    let mut best = ([0.0, 0.0], f64::INFINITY);
    for i in 0..=n {
        for j in 0..=n {
            let q = [0.5 * i as f64 / n as f64, 0.5 * j as f64 / n as f64];
            if !b.contains(q[0] + q[1]) {
                continue;
            }
            let d = (q[0] - x[0]).powi(2) + (q[1] - x[1]).powi(2);
            if d < best.1 {
                best = (q, d);
            }
        }
    }
    best.0
}

#[test]
fn projection_matches_grid_search() {
    let b = bounds();
    for x in [
        [0.3, 0.3],
        [-0.1, 0.2],
        [0.0, 0.0],
        [0.6, -0.2],
        [-0.3, -0.3],
        [0.05, 0.02],
    ] {
        let p = project_k_phi(PhaseContentPair::new(x[0], x[1]), &b);
        let q = brute_projection(x, &b);
        assert!(
            (p.phi_n - q[0]).abs() < 1e-3 && (p.phi_w - q[1]).abs() < 1e-3,
            "{x:?}: {p:?} vs {q:?}"
        );
    }
}

#[test]
fn soft_constraint_vanishes_as_eps_halves() {
    let b = bounds();
    for phi in [0.15, 0.2, 0.33] {
        let vals: Vec<f64> = [0.08, 0.04, 0.02, 0.01]
            .iter()
            .map(|e| soft_constraint_g(&b, *e, phi).unwrap().abs())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn tabulated_model_is_convex_and_increasing() {
    let t = Tabulated::new(vec![0.0, 0.5, 1.0], vec![1.0, 1.5, 2.0], 0.0, 0.5).unwrap();
    let m = CapillaryModel::Tabulated(t);
    let mut prev = m.gamma_eval(0.0).unwrap();
    for k in 1..=100 {
        let cur = m.gamma_eval(k as f64 / 100.0).unwrap();
        assert!(cur.0 > prev.0 && cur.1 > prev.1 && cur.2 > 0.0);
        prev = cur;
    }
    assert!(Tabulated::new(vec![0.0, 1.0], vec![1.0, -1.0], 0.0, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn capillary_algebra(s in 1e-9f64..0.999_999) {
        let m = bc13();
        let (g, g1, _) = m.gamma_eval(s).unwrap();
        let hp = hat_pressures(&m, s).unwrap();
        prop_assert!((hp.p_n - hp.p_w - g1).abs() <= 1e-12 * (1.0 + g1.abs()));
        prop_assert!((s * hp.p_n + (1.0 - s) * hp.p_w - g).abs() <= 1e-12 * (1.0 + g.abs()));
    }

    #[test]
    fn matches_closed_form(s in 0.0f64..0.999) {
        let (g, g1, g2) = bc13().gamma_eval(s).unwrap();
        let (h, h1, h2) = bc13_closed(s);
        prop_assert!(rel_err(g, h) < 1e-12 || (g - h).abs() < 1e-15);
        prop_assert!(rel_err(g1, h1) < 1e-12);
        prop_assert!(rel_err(g2, h2) < 1e-12);
    }

    #[test]
    fn kirchhoff_derivatives(s in 0.01f64..0.99) {
        let m = bc13();
        let (_, _, g2) = m.gamma_eval(s).unwrap();
        let h = 1e-3 * s.min(1.0 - s);
        let x = derivative(&|z| xi(&m, z).unwrap(), s, h);
        let p = derivative(&|z| psi(&m, z).unwrap(), s, h);
        prop_assert!(rel_err(x * x, s * (1.0 - s) * g2 * g2) < 1e-6);
        prop_assert!(rel_err(p, s * (1.0 - s) * g2) < 1e-6);
    }

    #[test]
    fn xi_of_saturation_is_half_lipschitz(a in 0.0f64..30.0, b in 0.0f64..30.0) {
        let m = bc13();
        let xa = xi(&m, saturation_from_capillary(&m, a)).unwrap();
        let xb = xi(&m, saturation_from_capillary(&m, b)).unwrap();
        prop_assert!((xa - xb).abs() <= 0.5 * (a - b).abs() + 1e-12);
    }

    #[test]
    fn psi_over_xi_is_half_lipschitz(s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let m = bc13();
        let (xs, ps) = kirchhoff_eval(&m, s).unwrap();
        let (xt, pt) = kirchhoff_eval(&m, t).unwrap();
        prop_assert!((ps - pt).abs() <= 0.5 * (xs - xt).abs() + 1e-12);
    }

    #[test]
    fn saturation_is_monotone(a in -5.0f64..50.0, b in -5.0f64..50.0) {
        let m = bc13();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(saturation_from_capillary(&m, lo) <= saturation_from_capillary(&m, hi));
    }

    #[test]
    fn regularized_clamp(s in 0.0f64..=1.0, k in 1usize..4) {
        let eps = [0.0, 0.1, 0.01, 0.001][k];
        let reg = RegularizedModel::new(bc13(), eps).unwrap();
        let (_, _, g2) = reg.gamma_eval(s).unwrap();
        prop_assert!(g2 >= eps * (1.0 - 1e-12) && g2 <= (1.0 + 1e-12) / eps);
    }

    #[test]
    fn soft_constraint_roundtrip_and_slope(phi in 0.1001f64..0.3999, k in 1usize..4) {
        let eps = [0.0, 0.1, 0.01, 0.001][k];
        let b = bounds();
        let chi = soft_constraint_g(&b, eps, phi).unwrap();
        prop_assert!((soft_constraint_g_inv(&b, eps, chi) - phi).abs() <= 1e-12);
        prop_assert!(soft_constraint_g_prime(&b, eps, phi) >= eps);
    }

    #[test]
    fn mobility_floor_bound(s in 0.0f64..=1.0, eps in 1e-4f64..0.25) {
        prop_assert!(mobility_floor(eps, s) >= 0.5 * (s + eps));
    }

    #[test]
    fn content_map_monotone_and_interior(
        a in -4.0f64..4.0, b in -4.0f64..4.0, c in -4.0f64..4.0, d in -4.0f64..4.0, k in 1usize..4
    ) {
        let eps = [0.0, 0.1, 0.01, 0.001][k];
        let reg = RegularizedModel::new(bc13(), eps).unwrap();
        let bd = bounds();
        let p = phi_from_potentials(&reg, &bd, a, b);
        let q = phi_from_potentials(&reg, &bd, c, d);
        prop_assert!(p.in_k_phi(&bd) && q.in_k_phi(&bd));
        let pairing = (p.phi_n - q.phi_n) * (a - c) + (p.phi_w - q.phi_w) * (b - d);
        prop_assert!(pairing >= -1e-12);
    }

    #[test]
    fn f_eps_midpoint_convexity(
        an in 0.0f64..0.4, aw in 0.0f64..0.4, bn in 0.0f64..0.4, bw in 0.0f64..0.4
    ) {
        let bd = bounds();
        let (a, b) = (PhaseContentPair::new(an, aw), PhaseContentPair::new(bn, bw));
        prop_assume!(bd.contains_strictly(a.phi()) && bd.contains_strictly(b.phi()));
        let reg = RegularizedModel::new(bc13(), 0.01).unwrap();
        let m = PhaseContentPair::new(0.5 * (an + bn), 0.5 * (aw + bw));
        let f = |p| f_eps_energy(&reg, &bd, p).unwrap().value;
        prop_assert!(f(m) <= 0.5 * (f(a) + f(b)) + 1e-12);
    }

    #[test]
    fn f_eps_gradient_matches_differences(sn in 0.05f64..0.95, phi in 0.12f64..0.38) {
        let bd = bounds();
        let reg = RegularizedModel::new(bc13(), 0.01).unwrap();
        let p = PhaseContentPair::new(sn * phi, (1.0 - sn) * phi);
        let g = f_eps_energy(&reg, &bd, p).unwrap().gradient.unwrap();
        let h = 1e-6;
        let f = |x: f64, y: f64| f_eps_energy(&reg, &bd, PhaseContentPair::new(x, y)).unwrap().value;
        let dn = (f(p.phi_n + h, p.phi_w) - f(p.phi_n - h, p.phi_w)) / (2.0 * h);
        let dw = (f(p.phi_n, p.phi_w + h) - f(p.phi_n, p.phi_w - h)) / (2.0 * h);
        prop_assert!((dn - g[0]).abs() <= 1e-5 * (1.0 + g[0].abs()));
        prop_assert!((dw - g[1]).abs() <= 1e-5 * (1.0 + g[1].abs()));
    }

    #[test]
    fn projection_idempotent_and_nonexpansive(
        a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0
    ) {
        let bd = bounds();
        let p = project_k_phi(PhaseContentPair::new(a, b), &bd);
        let q = project_k_phi(PhaseContentPair::new(c, d), &bd);
        prop_assert!(p.in_k_phi(&bd));
        let pp = project_k_phi(p, &bd);
        prop_assert!((pp.phi_n - p.phi_n).abs() < 1e-15 && (pp.phi_w - p.phi_w).abs() < 1e-15);
        let dist_in = (a - c).hypot(b - d);
        let dist_out = (p.phi_n - q.phi_n).hypot(p.phi_w - q.phi_w);
        prop_assert!(dist_out <= dist_in + 1e-14);
    }
}
