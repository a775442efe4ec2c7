use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::femcore::assembly::{div_coupling_matrix, elasticity_matrix, stiffness_matrix, Coefficient};
use crate::femcore::Factorized;

use super::params::MaterialParams;
use super::spaces::Spaces;
use super::CoupledError;

const MODES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakCouplingReport {
    pub c1_estimate: f64,
    pub lambda_tilde: f64,
    /// λ - M b² C₁
    pub margin: f64,
    /// advisory: the estimate is a lower bound of the true constant
    pub satisfied: bool,
    pub samples: usize,
    pub sample_ratios: Vec<f64>,
}

/// Random smooth field Σ a_kl cos(kπx/Lx) cos(lπy/Ly) with decaying coefficients.
#[derive(Debug, Clone)]
pub struct CosineField {
    coeffs: Vec<f64>,
    lx: f64,
    ly: f64,
}

impl CosineField {
    pub fn random(rng: &mut impl Rng, extent: [f64; 2]) -> Self {
        let coeffs = (0..MODES * MODES)
            .map(|kl| {
                let (k, l) = ((kl / MODES) as f64, (kl % MODES) as f64);
                rng.gen_range(-1.0..1.0) / (1.0 + k * k + l * l)
            })
            .collect();
        Self {
            coeffs,
            lx: extent[0],
            ly: extent[1].max(f64::MIN_POSITIVE),
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let pi = std::f64::consts::PI;
        let mut v = 0.0;
        for (kl, a) in self.coeffs.iter().enumerate() {
            let (k, l) = ((kl / MODES) as f64, (kl % MODES) as f64);
            v += a * (k * pi * x[0] / self.lx).cos() * (l * pi * x[1] / self.ly).cos();
        }
        v
    }
}

fn extent(coords: &[[f64; 2]]) -> [f64; 2] {
    let mut e = [0.0f64; 2];
    for x in coords {
        e[0] = e[0].max(x[0]);
        e[1] = e[1].max(x[1]);
    }
    e
}

/// Samples the elasticity problems with loads -w₁ and ∇w₂ (natural traction w₂ n)
/// and takes the largest λ̃‖∇ div v‖ over ‖w₁‖_{L²} resp. ‖w₂‖_{H¹}.
///
/// ∇ div v is evaluated on the lumped L² projection of the cellwise divergence.
pub fn weak_coupling_audit(
    spaces: &Spaces,
    params: &MaterialParams,
    samples: usize,
    seed: u64,
) -> Result<WeakCouplingReport, CoupledError> {
    if samples == 0 {
        return Err(CoupledError::InvalidParams(
            "weak coupling audit needs at least one sample".into(),
        ));
    }
    let mesh = &*spaces.mesh;
    let mech = &spaces.mech;
    let d = mesh.dim;
    let nv = mesh.num_vertices();
    let lambda_tilde = params.lame_lambda / (2.0 * params.lame_mu);
    let ident: Vec<usize> = (0..nv).collect();
    let op = elasticity_matrix(mesh, 0.5, lambda_tilde).restrict(
        mech.free_map(),
        mech.num_free(),
        mech.free_map(),
        mech.num_free(),
    );
    let factor = Factorized::cholesky(&op)?;
    let div = div_coupling_matrix(mesh, 1.0).restrict(&ident, nv, mech.free_map(), mech.num_free());
    let stiff = stiffness_matrix(mesh, &Coefficient::Constant(1.0));
    let ext = extent(&mesh.coords);

    let grad_div_norm = |v: &[f64]| {
        let dv: Vec<f64> = div.matvec(v).iter().zip(&spaces.lumped).map(|(a, m)| a / m).collect();
        stiff.quadratic_form(&dv).max(0.0).sqrt()
    };

    let mut ratios = Vec::with_capacity(2 * samples);
    for k in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ k as u64);
        let w2f = CosineField::random(&mut rng, ext);
        let w1f: Vec<CosineField> = (0..d).map(|_| CosineField::random(&mut rng, ext)).collect();
        let w2: Vec<f64> = mesh.coords.iter().map(|x| w2f.eval(*x)).collect();

        let rhs2 = div.matvec_transpose(&w2);
        let v2 = factor.solve(&rhs2)?;
        let h1 = (spaces.mass.quadratic_form(&w2) + stiff.quadratic_form(&w2)).sqrt();
        if h1 > 0.0 {
            ratios.push(lambda_tilde * grad_div_norm(&v2) / h1);
        }

        let mut w1_full = vec![0.0; nv * d];
        let mut l2 = 0.0;
        for (a, f) in w1f.iter().enumerate() {
            let comp: Vec<f64> = mesh.coords.iter().map(|x| f.eval(*x)).collect();
            l2 += spaces.mass.quadratic_form(&comp);
            for (i, v) in spaces.mass.matvec(&comp).into_iter().enumerate() {
                w1_full[i * d + a] = -v;
            }
        }
        let v1 = factor.solve(&mech.restrict(&w1_full))?;
        if l2 > 0.0 {
            ratios.push(lambda_tilde * grad_div_norm(&v1) / l2.sqrt());
        }
    }
    let c1 = ratios.iter().copied().fold(0.0, f64::max);
    let margin = params.lame_lambda - params.biot_m * params.biot_b * params.biot_b * c1;
    Ok(WeakCouplingReport {
        c1_estimate: c1,
        lambda_tilde,
        margin,
        satisfied: margin > 0.0,
        samples,
        sample_ratios: ratios,
    })
}
