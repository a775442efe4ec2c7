use super::phimap::PhaseContentPair;
use super::soft::PorosityBounds;

fn project_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    [a[0] + t * d[0], a[1] + t * d[1]]
}

/// Euclidean projection onto K_φ = {φ_n, φ_w ≥ 0, φ♭ ≤ φ_n + φ_w ≤ φ♯}.
pub fn project_k_phi(pair: PhaseContentPair, bounds: &PorosityBounds) -> PhaseContentPair {
    if pair.in_k_phi(bounds) {
        return pair;
    }
    let (lo, hi) = (bounds.phi_lo, bounds.phi_hi);
    let p = [pair.phi_n, pair.phi_w];
    // faces: sum = lo, sum = hi, φ_w = 0, φ_n = 0
    let faces = [
        ([lo, 0.0], [0.0, lo]),
        ([hi, 0.0], [0.0, hi]),
        ([lo, 0.0], [hi, 0.0]),
        ([0.0, lo], [0.0, hi]),
    ];
    let mut best = p;
    let mut best_d = f64::INFINITY;
    for (a, b) in faces {
        let q = if a[0] + a[1] == b[0] + b[1] {
            // exact line projection keeps the sum on the face
            let shift = 0.5 * (p[0] + p[1] - (a[0] + a[1]));
            let cand = [p[0] - shift, p[1] - shift];
            if cand[0] >= 0.0 && cand[1] >= 0.0 {
                cand
            } else {
                project_segment(p, a, b)
            }
        } else {
            project_segment(p, a, b)
        };
        let d = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
        if d < best_d {
            best_d = d;
            best = q;
        }
    }
    snap_sum(best[0].max(0.0), best[1].max(0.0), lo, hi)
}

/// Rounding can leave the sum an ulp outside [lo, hi]; moves the larger component back.
fn snap_sum(mut n: f64, mut w: f64, lo: f64, hi: f64) -> PhaseContentPair {
    for _ in 0..8 {
        let s = n + w;
        let big = if n >= w { &mut n } else { &mut w };
        if s > hi {
            *big = big.next_down().max(0.0);
        } else if s < lo {
            *big = big.next_up();
        } else {
            break;
        }
    }
    PhaseContentPair::new(n, w)
}
