//! Kirchhoff transforms ξ(s) = ∫₀ˢ √(z(1-z)) γ''(z) dz and ψ(s) = ∫₀ˢ z(1-z) γ''(z) dz.

use super::capillary::CapillaryLaw;
use super::error::{check_unit, ConstitutiveError};
use super::quadrature::integrate;

const ABS_TOL: f64 = 1e-13;
const REL_TOL: f64 = 1e-14;

#[derive(Clone, Copy)]
enum Weight {
    Sqrt,
    Linear,
}

fn weight(w: Weight, z: f64, omz: f64) -> f64 {
    match w {
        Weight::Sqrt => (z * omz).sqrt(),
        Weight::Linear => z * omz,
    }
}

/// Splits [0, s] at 1/2; uses z = u² on the left piece and z = 1 - t^m on the right one.
fn transform<L: CapillaryLaw + ?Sized>(model: &L, s: f64, w: Weight) -> Result<f64, ConstitutiveError> {
    check_unit("s", s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let left_end = s.min(0.5);
    let left = integrate(
        |u| {
            let z = u * u;
            let omz = 1.0 - z;
            weight(w, z, omz) * model.gamma_second_split(z, omz) * 2.0 * u
        },
        0.0,
        left_end.sqrt(),
        ABS_TOL,
        REL_TOL,
    )?;
    if s <= 0.5 {
        return Ok(left);
    }
    let m = model.endpoint_exponent();
    let t_lo = (1.0 - s).powf(1.0 / m);
    let t_hi = 0.5f64.powf(1.0 / m);
    let right = integrate(
        |t| {
            let omz = t.powf(m);
            let z = 1.0 - omz;
            weight(w, z, omz) * model.gamma_second_split(z, omz) * m * t.powf(m - 1.0)
        },
        t_lo,
        t_hi,
        ABS_TOL,
        REL_TOL,
    )?;
    Ok(left + right)
}

pub fn xi<L: CapillaryLaw + ?Sized>(model: &L, s: f64) -> Result<f64, ConstitutiveError> {
    transform(model, s, Weight::Sqrt)
}

pub fn psi<L: CapillaryLaw + ?Sized>(model: &L, s: f64) -> Result<f64, ConstitutiveError> {
    check_unit("s", s)?;
    if let Some(v) = model.psi_closed_form(s) {
        return Ok(v);
    }
    transform(model, s, Weight::Linear)
}

/// (ξ(s), ψ(s)).
pub fn kirchhoff_eval<L: CapillaryLaw + ?Sized>(model: &L, s: f64) -> Result<(f64, f64), ConstitutiveError> {
    Ok((xi(model, s)?, psi(model, s)?))
}

/// ψ evaluated by quadrature even when a closed form exists.
pub fn psi_by_quadrature<L: CapillaryLaw + ?Sized>(model: &L, s: f64) -> Result<f64, ConstitutiveError> {
    transform(model, s, Weight::Linear)
}
