#![allow(dead_code)]

use std::sync::Arc;

use poromech::constitutive::{CapillaryModel, PorosityBounds};
use poromech::coupled::{MaterialParams, PermeabilityLaw, Spaces};
use poromech::femcore::{generate_mesh, MeshSpec};
use poromech::scenario_io::{bundled, load_config, Config};

/// Brooks-Corey with p_e = 1, λ_BC = 3.
pub fn bc13() -> CapillaryModel {
    CapillaryModel::brooks_corey(1.0, 3.0).unwrap()
}

/// γ, γ', γ'' of the (1, 3) Brooks-Corey law in closed form.
pub fn bc13_closed(s: f64) -> (f64, f64, f64) {
    let r = 1.0 - s;
    (
        1.5 * (1.0 - r.powf(2.0 / 3.0)),
        r.powf(-1.0 / 3.0),
        r.powf(-4.0 / 3.0) / 3.0,
    )
}

pub fn params(nv: usize) -> MaterialParams {
    MaterialParams {
        viscosity_n: 1.0,
        viscosity_w: 1.0,
        density_n: 0.5,
        density_w: 1.0,
        gravity: [0.0, 0.0],
        lame_mu: 1.0,
        lame_lambda: 2.0,
        biot_b: 1.0,
        biot_m: 1.0,
        bounds: PorosityBounds::new(0.1, 0.4).unwrap(),
        permeability: PermeabilityLaw::KozenyCarman { k0: 1.0 },
        phi_r: vec![0.25; nv],
        rho_sr: vec![0.0; nv],
        f_ext: vec![[0.0; 2]; nv],
        p_dirichlet: [vec![1.375; nv], vec![-0.625; nv]],
    }
}

/// Unit square, flow Dirichlet on top, mechanics Dirichlet on the bottom.
pub fn square(n: usize, p: &MaterialParams) -> Spaces {
    let m = Arc::new(
        generate_mesh(&MeshSpec::Rectangle {
            nx: n,
            ny: n,
            lx: 1.0,
            ly: 1.0,
        })
        .unwrap(),
    );
    Spaces::new(m, &["top".into()], &["bottom".into()], p).unwrap()
}

pub fn bundled_config(name: &str) -> Config {
    load_config(bundled(name).unwrap()).unwrap()
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// 5-point central difference.
pub fn derivative(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
