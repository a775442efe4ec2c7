use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::system::FrozenSystem;

const MODES: usize = 4;

/// Outcome of sampling ⟨H(Y₁) − H(Y₂), Y₁ − Y₂⟩ over random pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub pairs: usize,
    /// min of the pairing over the Euclidean ‖ΔY‖²
    pub min_euclidean_ratio: f64,
    /// min of the pairing over the lumped-mass ‖ΔY‖²; the coercivity estimate
    pub coercivity: f64,
    /// pairs below −1e−12 ‖ΔY‖²
    pub violations: usize,
}

struct SmoothField {
    modes: [(f64, f64, f64, f64); MODES],
}

impl SmoothField {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        Self {
            modes: std::array::from_fn(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0..3) as f64,
                    rng.gen_range(0..3) as f64,
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            }),
        }
    }

    fn at(&self, x: [f64; 2]) -> f64 {
        self.modes
            .iter()
            .map(|(c, kx, ky, ph)| c * (std::f64::consts::PI * (kx * x[0] + ky * x[1]) + ph).cos())
            .sum::<f64>()
            / MODES as f64
    }
}

/// Samples the frozen map around `center` with smooth perturbations of size `amplitude`.
/// Drawing from a fixed set of smooth fields keeps the coercivity estimate comparable across meshes.
pub fn monotonicity_samples(
    sys: &FrozenSystem,
    center: &[f64],
    pairs: usize,
    amplitude: f64,
    seed: u64,
) -> MonotonicityReport {
    let l = sys.layout();
    let sp = sys.spaces;
    let mesh = &*sp.mesh;
    let d = sp.dim();
    let m = &sp.lumped;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // vertex of every unknown
    let mut vertex = vec![0; l.len()];
    for a in 0..2 {
        for (j, dof) in sp.flow.free_dofs().iter().enumerate() {
            vertex[l.flow(a) + j] = *dof;
        }
    }
    for (j, dof) in sp.mech.free_dofs().iter().enumerate() {
        vertex[l.u() + j] = dof / d;
    }
    for i in 0..l.nv {
        vertex[l.theta() + i] = i;
        vertex[l.pi() + i] = i;
    }
    let mass: Vec<f64> = vertex.iter().map(|v| m[*v]).collect();
    // field of every unknown: p_n, p_w, u components, θ, π
    let field = |k: usize| -> usize {
        if k < l.u() {
            k / l.nf.max(1)
        } else if k < l.theta() {
            2 + sp.mech.free_dofs()[k - l.u()] % d
        } else if k < l.pi() {
            2 + d
        } else {
            3 + d
        }
    };
    let nfields = 4 + d;

    let perturb = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let fields: Vec<SmoothField> = (0..nfields).map(|_| SmoothField::draw(rng)).collect();
        (0..l.len())
            .map(|k| center[k] + amplitude * fields[field(k)].at(mesh.coords[vertex[k]]))
            .collect()
    };

    let mut report = MonotonicityReport {
        pairs,
        min_euclidean_ratio: f64::INFINITY,
        coercivity: f64::INFINITY,
        violations: 0,
    };
    for _ in 0..pairs {
        let y1 = perturb(&mut rng);
        let y2 = perturb(&mut rng);
        let h1 = sys.residual(&y1);
        let h2 = sys.residual(&y2);
        let (mut pairing, mut e2, mut m2) = (0.0, 0.0, 0.0);
        for k in 0..l.len() {
            let dy = y1[k] - y2[k];
            pairing += (h1[k] - h2[k]) * dy;
            e2 += dy * dy;
            m2 += mass[k] * dy * dy;
        }
        if e2 == 0.0 {
            continue;
        }
        if pairing < -1e-12 * e2 {
            report.violations += 1;
        }
        report.min_euclidean_ratio = report.min_euclidean_ratio.min(pairing / e2);
        report.coercivity = report.coercivity.min(pairing / m2);
    }
    report
}
