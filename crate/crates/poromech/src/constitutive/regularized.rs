//! ε-clamped capillary law: γ_ε'' = min(1/ε, max(ε, γ'')), integrated from γ'(0), γ(0).

use super::capillary::{CapillaryLaw, CapillaryModel};
use super::error::{check_unit, ConstitutiveError};

#[derive(Debug, Clone, Copy, PartialEq)]
enum SegKind {
    Const(f64),
    Base,
}

#[derive(Debug, Clone, PartialEq)]
struct Segment {
    a: f64,
    b: f64,
    kind: SegKind,
    /// γ_ε(a), γ_ε'(a)
    g0: f64,
    g1: f64,
    /// γ_ε - γ = off0 + off1 (s - a) on Base segments
    off0: f64,
    off1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedModel {
    base: CapillaryModel,
    eps: f64,
    segs: Vec<Segment>,
    g0_end: f64,
    g1_end: f64,
}

impl RegularizedModel {
    pub fn new(base: CapillaryModel, eps: f64) -> Result<Self, ConstitutiveError> {
        if !(eps > 0.0 && eps <= 0.25) {
            return Err(ConstitutiveError::Domain {
                what: "eps",
                value: eps,
                domain: "(0, 1/4]",
            });
        }
        let lo = eps;
        let hi = 1.0 / eps;
        let mut cuts = vec![0.0, 1.0];
        cuts.extend(base.crossings(lo));
        cuts.extend(base.crossings(hi));
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

        let mut segs: Vec<Segment> = Vec::with_capacity(cuts.len());
        let (mut g0, mut g1) = base.gamma_omz(0.0, 1.0);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = 0.5 * (a + b);
            let g2 = base.gamma_second(mid);
            let kind = if g2 < lo {
                SegKind::Const(lo)
            } else if g2 > hi {
                SegKind::Const(hi)
            } else {
                SegKind::Base
            };
            let (off0, off1) = match kind {
                SegKind::Base => {
                    let (bg0, bg1) = base.gamma_omz(a, 1.0 - a);
                    (g0 - bg0, g1 - bg1)
                }
                SegKind::Const(_) => (0.0, 0.0),
            };
            let seg = Segment {
                a,
                b,
                kind,
                g0,
                g1,
                off0,
                off1,
            };
            let (e0, e1, _) = seg_eval(&base, &seg, b, 1.0 - b);
            g0 = e0;
            g1 = e1;
            segs.push(seg);
        }
        Ok(Self {
            base,
            eps,
            segs,
            g0_end: g0,
            g1_end: g1,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn base(&self) -> &CapillaryModel {
        &self.base
    }

    /// Breakpoints of the clamp, including 0 and 1.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.segs.iter().map(|s| s.a).collect();
        v.push(1.0);
        v
    }

    fn seg_of(&self, s: f64) -> &Segment {
        let k = self.segs.partition_point(|g| g.a <= s).saturating_sub(1);
        &self.segs[k.min(self.segs.len() - 1)]
    }

    /// (γ_ε, γ_ε', γ_ε'') at s ∈ [0, 1]; no domain check.
    pub fn eval_unchecked(&self, s: f64) -> (f64, f64, f64) {
        seg_eval(&self.base, self.seg_of(s), s, 1.0 - s)
    }

    pub fn gamma_prime_end(&self) -> f64 {
        self.g1_end
    }

    pub fn gamma_end(&self) -> f64 {
        self.g0_end
    }

    /// S_ε(p) together with its (generalized) derivative; 0 on the plateaus.
    pub fn saturation_with_derivative(&self, p: f64) -> (f64, f64) {
        if p <= self.segs[0].g1 {
            return (0.0, 0.0);
        }
        if p >= self.g1_end {
            return (1.0, 0.0);
        }
        let k = self.segs.partition_point(|g| g.g1 <= p).saturating_sub(1);
        let seg = &self.segs[k.min(self.segs.len() - 1)];
        match seg.kind {
            SegKind::Const(c) => {
                let s = (seg.a + (p - seg.g1) / c).clamp(seg.a, seg.b);
                (s, 1.0 / c)
            }
            SegKind::Base => {
                let s = self.base.inverse_gamma_prime(p - seg.off1, seg.a, seg.b);
                let g2 = self.base.gamma_second(s).clamp(self.eps, 1.0 / self.eps);
                (s, 1.0 / g2)
            }
        }
    }
}

fn seg_eval(base: &CapillaryModel, seg: &Segment, s: f64, oms: f64) -> (f64, f64, f64) {
    let d = s - seg.a;
    match seg.kind {
        SegKind::Const(c) => (seg.g0 + seg.g1 * d + 0.5 * c * d * d, seg.g1 + c * d, c),
        SegKind::Base => {
            let (g, g1) = base.gamma_omz(s, oms);
            let g2 = base.gamma_second_split(s, oms);
            (g + seg.off0 + seg.off1 * d, g1 + seg.off1, g2)
        }
    }
}

impl CapillaryLaw for RegularizedModel {
    fn gamma(&self, s: f64) -> Result<f64, ConstitutiveError> {
        check_unit("s", s)?;
        Ok(self.eval_unchecked(s).0)
    }

    fn gamma_eval(&self, s: f64) -> Result<(f64, f64, f64), ConstitutiveError> {
        check_unit("s", s)?;
        Ok(self.eval_unchecked(s))
    }

    fn gamma_second_split(&self, z: f64, omz: f64) -> f64 {
        self.base.gamma_second_split(z, omz).clamp(self.eps, 1.0 / self.eps)
    }

    fn saturation(&self, p: f64) -> f64 {
        self.saturation_with_derivative(p).0
    }

    fn endpoint_exponent(&self) -> f64 {
        2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg(eps: f64) -> RegularizedModel {
        RegularizedModel::new(CapillaryModel::brooks_corey(1.0, 3.0).unwrap(), eps).unwrap()
    }

    #[test]
    fn clamp_inactive_matches_base_exactly() {
        let r = reg(0.01);
        let base = CapillaryModel::brooks_corey(1.0, 3.0).unwrap();
        let s = 7.0 / 8.0;
        let a = r.gamma_eval(s).unwrap();
        let b = base.gamma_eval(s).unwrap();
        for (x, y) in [(a.0, b.0), (a.1, b.1), (a.2, b.2)] {
            assert!((x - y).abs() <= 4.0 * f64::EPSILON * y.abs());
        }
    }

    #[test]
    fn second_derivative_bounds() {
        for eps in [0.25, 0.1, 0.01, 1e-3] {
            let r = reg(eps);
            for i in 0..=1000 {
                let s = i as f64 / 1000.0;
                let (_, _, g2) = r.eval_unchecked(s);
                assert!(
                    g2 >= eps * (1.0 - 1e-14) && g2 <= (1.0 + 1e-14) / eps,
                    "eps={eps} s={s} g2={g2}"
                );
            }
        }
    }

    #[test]
    fn continuity_across_breakpoints() {
        let r = reg(0.01);
        for b in r.breakpoints() {
            if b <= 0.0 || b >= 1.0 {
                continue;
            }
            let l = r.eval_unchecked(b - 1e-12);
            let h = r.eval_unchecked(b + 1e-12);
            assert!((l.0 - h.0).abs() < 1e-9);
            assert!((l.1 - h.1).abs() < 1e-9);
        }
    }

    #[test]
    fn saturation_cap_and_inverse() {
        let r = reg(0.01);
        assert_eq!(r.saturation(r.gamma_prime_end()), 1.0);
        assert_eq!(r.saturation(r.gamma_prime_end() + 5.0), 1.0);
        assert_eq!(r.saturation(0.99), 0.0);
        for i in 1..200 {
            let s = i as f64 / 200.0;
            let (_, g1, _) = r.eval_unchecked(s);
            assert!((r.saturation(g1) - s).abs() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn rejects_eps_out_of_range() {
        let base = CapillaryModel::brooks_corey(1.0, 3.0).unwrap();
        assert!(RegularizedModel::new(base.clone(), 0.3).is_err());
        assert!(RegularizedModel::new(base, 0.0).is_err());
    }
}
