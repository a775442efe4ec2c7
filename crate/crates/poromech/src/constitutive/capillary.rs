//! Capillary energy densities γ on [0, 1] and their derivatives.

use serde::{Deserialize, Serialize};

use super::error::{check_unit, ConstitutiveError};

/// Behaviour shared by the exact and the ε-clamped capillary laws.
pub trait CapillaryLaw: Send + Sync {
    /// γ(s), finite on the whole of [0, 1].
    fn gamma(&self, s: f64) -> Result<f64, ConstitutiveError>;

    /// (γ, γ', γ'') at s.
    fn gamma_eval(&self, s: f64) -> Result<(f64, f64, f64), ConstitutiveError>;

    /// γ'' from the pair (z, 1 - z); callers pass `omz` exactly when z is close to 1.
    fn gamma_second_split(&self, z: f64, omz: f64) -> f64;

    /// Extended saturation map S: total, nondecreasing, values in [0, 1].
    fn saturation(&self, p: f64) -> f64;

    /// Exponent m of the change of variables z = 1 - t^m used by the
    /// Kirchhoff quadratures near z = 1.
    fn endpoint_exponent(&self) -> f64;

    fn psi_closed_form(&self, _s: f64) -> Option<f64> {
        None
    }
}

/// Brooks–Corey energy with γ'(s) = p_e (1 - s)^(-1/λ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrooksCorey {
    pub entry_pressure: f64,
    pub exponent: f64,
    pub gamma0: f64,
}

impl BrooksCorey {
    pub fn new(entry_pressure: f64, exponent: f64, gamma0: f64) -> Result<Self, ConstitutiveError> {
        if !(entry_pressure > 0.0 && entry_pressure.is_finite()) {
            return Err(ConstitutiveError::InvalidModel(format!(
                "entry pressure must be positive, got {entry_pressure}"
            )));
        }
        if !(exponent > 2.0 && exponent.is_finite()) {
            return Err(ConstitutiveError::InvalidModel(format!(
                "Brooks-Corey exponent must exceed 2, got {exponent}"
            )));
        }
        if !(gamma0 >= 0.0 && gamma0.is_finite()) {
            return Err(ConstitutiveError::InvalidModel(format!(
                "gamma0 must be nonnegative, got {gamma0}"
            )));
        }
        Ok(Self {
            entry_pressure,
            exponent,
            gamma0,
        })
    }

    fn c(&self) -> f64 {
        1.0 - 1.0 / self.exponent
    }

    fn gamma_omz(&self, omz: f64) -> f64 {
        let c = self.c();
        self.gamma0 + self.entry_pressure * (1.0 - omz.powf(c)) / c
    }

    fn gamma_prime_omz(&self, omz: f64) -> f64 {
        self.entry_pressure * omz.powf(-1.0 / self.exponent)
    }

    fn gamma_second_omz(&self, omz: f64) -> f64 {
        let l = self.exponent;
        self.entry_pressure / l * omz.powf(-1.0 / l - 1.0)
    }
}

impl CapillaryLaw for BrooksCorey {
    fn gamma(&self, s: f64) -> Result<f64, ConstitutiveError> {
        check_unit("s", s)?;
        Ok(self.gamma_omz(1.0 - s))
    }

    fn gamma_eval(&self, s: f64) -> Result<(f64, f64, f64), ConstitutiveError> {
        check_unit("s", s)?;
        if s == 1.0 {
            return Err(ConstitutiveError::InfiniteAtEndpoint { what: "gamma'", s });
        }
        let omz = 1.0 - s;
        Ok((
            self.gamma_omz(omz),
            self.gamma_prime_omz(omz),
            self.gamma_second_omz(omz),
        ))
    }

    fn gamma_second_split(&self, _z: f64, omz: f64) -> f64 {
        self.gamma_second_omz(omz)
    }

    fn saturation(&self, p: f64) -> f64 {
        if p <= self.entry_pressure {
            return 0.0;
        }
        let s = 1.0 - (self.entry_pressure / p).powf(self.exponent);
        s.clamp(0.0, 1.0)
    }

    fn endpoint_exponent(&self) -> f64 {
        1.0 / (0.5 - 1.0 / self.exponent)
    }

    fn psi_closed_form(&self, s: f64) -> Option<f64> {
        let l = self.exponent;
        let a = 1.0 - 1.0 / l;
        let b = 2.0 - 1.0 / l;
        let w = 1.0 - s;
        Some(self.entry_pressure / l * ((1.0 / a - 1.0 / b) - (w.powf(a) / a - w.powf(b) / b)))
    }
}

/// γ'' given at nodes on [0, 1] and interpolated by a monotone (Fritsch–Carlson)
/// cubic; γ' and γ are its exact antiderivatives anchored at γ'(0), γ(0).
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    s: Vec<f64>,
    g2: Vec<f64>,
    slopes: Vec<f64>,
    g1_nodes: Vec<f64>,
    g0_nodes: Vec<f64>,
}

const I1_AT_ONE: [f64; 4] = [0.5, 1.0 / 12.0, 0.5, -1.0 / 12.0];
const I2_AT_ONE: [f64; 4] = [0.35, 0.05, 0.15, -1.0 / 30.0];

fn hermite(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    ]
}

fn hermite_int1(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    [
        t4 / 2.0 - t3 + t,
        t4 / 4.0 - 2.0 * t3 / 3.0 + t2 / 2.0,
        -t4 / 2.0 + t3,
        t4 / 4.0 - t3 / 3.0,
    ]
}

fn hermite_int2(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    [
        t5 / 10.0 - t4 / 4.0 + t2 / 2.0,
        t5 / 20.0 - t4 / 6.0 + t3 / 6.0,
        -t5 / 10.0 + t4 / 4.0,
        t5 / 20.0 - t4 / 12.0,
    ]
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![del[0], del[0]];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if del[k - 1] * del[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let mut v = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if v.signum() != d0.signum() || d0 == 0.0 {
            v = 0.0;
        } else if d0.signum() != d1.signum() && v.abs() > 3.0 * d0.abs() {
            v = 3.0 * d0;
        }
        v
    };
    d[0] = end(h[0], h[1], del[0], del[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    d
}

impl Tabulated {
    /// `s` must start at 0, end at 1 and increase strictly; `g2` holds positive γ'' values.
    pub fn new(s: Vec<f64>, g2: Vec<f64>, gamma0: f64, gamma_prime0: f64) -> Result<Self, ConstitutiveError> {
        let bad = |m: String| Err(ConstitutiveError::InvalidModel(m));
        if s.len() < 2 || s.len() != g2.len() {
            return bad(format!(
                "table needs at least two nodes and matching lengths, got {} and {}",
                s.len(),
                g2.len()
            ));
        }
        if s[0] != 0.0 || *s.last().unwrap() != 1.0 {
            return bad("table nodes must start at 0 and end at 1".into());
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return bad("table nodes must increase strictly".into());
        }
        if g2.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return bad("tabulated gamma'' must be positive and finite".into());
        }
        if !(gamma0 >= 0.0 && gamma0.is_finite()) || !(gamma_prime0 >= 0.0 && gamma_prime0.is_finite()) {
            return bad("gamma(0) and gamma'(0) must be nonnegative".into());
        }
        let slopes = pchip_slopes(&s, &g2);
        let n = s.len();
        let mut g1_nodes = vec![gamma_prime0; n];
        let mut g0_nodes = vec![gamma0; n];
        for k in 0..n - 1 {
            let h = s[k + 1] - s[k];
            let c = [g2[k], h * slopes[k], g2[k + 1], h * slopes[k + 1]];
            let i1: f64 = (0..4).map(|j| c[j] * I1_AT_ONE[j]).sum();
            let i2: f64 = (0..4).map(|j| c[j] * I2_AT_ONE[j]).sum();
            g1_nodes[k + 1] = g1_nodes[k] + h * i1;
            g0_nodes[k + 1] = g0_nodes[k] + g1_nodes[k] * h + h * h * i2;
        }
        Ok(Self {
            s,
            g2,
            slopes,
            g1_nodes,
            g0_nodes,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.s
    }

    pub fn values(&self) -> &[f64] {
        &self.g2
    }

    fn locate(&self, x: f64) -> (usize, f64, f64) {
        let n = self.s.len();
        let k = self.s.partition_point(|v| *v <= x).saturating_sub(1).min(n - 2);
        let h = self.s[k + 1] - self.s[k];
        (k, h, (x - self.s[k]) / h)
    }

    fn coeffs(&self, k: usize, h: f64) -> [f64; 4] {
        [self.g2[k], h * self.slopes[k], self.g2[k + 1], h * self.slopes[k + 1]]
    }

    fn g2_at(&self, x: f64) -> f64 {
        let (k, h, t) = self.locate(x);
        let c = self.coeffs(k, h);
        let b = hermite(t);
        (0..4).map(|j| c[j] * b[j]).sum()
    }

    fn g1_at(&self, x: f64) -> f64 {
        let (k, h, t) = self.locate(x);
        let c = self.coeffs(k, h);
        let b = hermite_int1(t);
        self.g1_nodes[k] + h * (0..4).map(|j| c[j] * b[j]).sum::<f64>()
    }

    fn g0_at(&self, x: f64) -> f64 {
        let (k, h, t) = self.locate(x);
        let c = self.coeffs(k, h);
        let b = hermite_int2(t);
        self.g0_nodes[k] + self.g1_nodes[k] * h * t + h * h * (0..4).map(|j| c[j] * b[j]).sum::<f64>()
    }

    fn inverse_prime_on(&self, p: f64, lo: f64, hi: f64) -> f64 {
        newton_bisect(|x| self.g1_at(x) - p, |x| self.g2_at(x), lo, hi)
    }

    fn crossings(&self, level: f64) -> Vec<f64> {
        let mut out = Vec::new();
        const SUB: usize = 32;
        for k in 0..self.s.len() - 1 {
            let (a, b) = (self.s[k], self.s[k + 1]);
            let mut xl = a;
            let mut fl = self.g2_at(a) - level;
            for j in 1..=SUB {
                let xr = a + (b - a) * j as f64 / SUB as f64;
                let fr = self.g2_at(xr) - level;
                if fl == 0.0 {
                    out.push(xl);
                } else if fl * fr < 0.0 {
                    let (mut lo, mut hi) = (xl, xr);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if mid <= lo || mid >= hi {
                            break;
                        }
                        if (self.g2_at(mid) - level) * fl > 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    out.push(0.5 * (lo + hi));
                }
                xl = xr;
                fl = fr;
            }
        }
        out
    }
}

impl CapillaryLaw for Tabulated {
    fn gamma(&self, s: f64) -> Result<f64, ConstitutiveError> {
        check_unit("s", s)?;
        Ok(self.g0_at(s))
    }

    fn gamma_eval(&self, s: f64) -> Result<(f64, f64, f64), ConstitutiveError> {
        check_unit("s", s)?;
        Ok((self.g0_at(s), self.g1_at(s), self.g2_at(s)))
    }

    fn gamma_second_split(&self, z: f64, _omz: f64) -> f64 {
        self.g2_at(z)
    }

    fn saturation(&self, p: f64) -> f64 {
        let n = self.s.len();
        if p <= self.g1_nodes[0] {
            return 0.0;
        }
        if p >= self.g1_nodes[n - 1] {
            return 1.0;
        }
        let k = self.g1_nodes.partition_point(|v| *v <= p).saturating_sub(1).min(n - 2);
        self.inverse_prime_on(p, self.s[k], self.s[k + 1])
    }

    fn endpoint_exponent(&self) -> f64 {
        2.0
    }
}

/// Safeguarded Newton iteration for an increasing f with f(lo) <= 0 <= f(hi).
pub(crate) fn newton_bisect(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 1e-15 {
            break;
        }
        let d = df(x);
        let mut next = x - fx / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 {
            x = next;
            break;
        }
        x = next;
    }
    x.clamp(lo, hi)
}

/// Concrete capillary law selected by configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum CapillaryModel {
    BrooksCorey(BrooksCorey),
    Tabulated(Tabulated),
}

impl CapillaryModel {
    pub fn brooks_corey(entry_pressure: f64, exponent: f64) -> Result<Self, ConstitutiveError> {
        Ok(Self::BrooksCorey(BrooksCorey::new(entry_pressure, exponent, 0.0)?))
    }

    /// γ'(s); +∞ for Brooks–Corey at s = 1.
    pub fn gamma_prime(&self, s: f64) -> f64 {
        match self {
            Self::BrooksCorey(m) => m.gamma_prime_omz(1.0 - s),
            Self::Tabulated(m) => m.g1_at(s),
        }
    }

    pub fn gamma_second(&self, s: f64) -> f64 {
        match self {
            Self::BrooksCorey(m) => m.gamma_second_omz(1.0 - s),
            Self::Tabulated(m) => m.g2_at(s),
        }
    }

    pub fn gamma_value(&self, s: f64) -> f64 {
        match self {
            Self::BrooksCorey(m) => m.gamma_omz(1.0 - s),
            Self::Tabulated(m) => m.g0_at(s),
        }
    }

    pub(crate) fn gamma_omz(&self, z: f64, omz: f64) -> (f64, f64) {
        match self {
            Self::BrooksCorey(m) => (m.gamma_omz(omz), m.gamma_prime_omz(omz)),
            Self::Tabulated(m) => (m.g0_at(z), m.g1_at(z)),
        }
    }

    /// Points of (0, 1) where γ'' crosses `level`, ascending.
    pub(crate) fn crossings(&self, level: f64) -> Vec<f64> {
        match self {
            Self::BrooksCorey(m) => {
                let ratio = m.entry_pressure / (m.exponent * level);
                if ratio >= 1.0 {
                    return Vec::new();
                }
                let omz = ratio.powf(m.exponent / (m.exponent + 1.0));
                let s = 1.0 - omz;
                if s > 0.0 && s < 1.0 {
                    vec![s]
                } else {
                    Vec::new()
                }
            }
            Self::Tabulated(m) => m.crossings(level),
        }
    }

    /// (γ')⁻¹(p) restricted to [lo, hi]; assumes γ'(lo) <= p <= γ'(hi).
    pub(crate) fn inverse_gamma_prime(&self, p: f64, lo: f64, hi: f64) -> f64 {
        match self {
            Self::BrooksCorey(m) => {
                let s = 1.0 - (m.entry_pressure / p).powf(m.exponent);
                s.clamp(lo, hi)
            }
            Self::Tabulated(m) => m.inverse_prime_on(p, lo, hi),
        }
    }
}

impl CapillaryLaw for CapillaryModel {
    fn gamma(&self, s: f64) -> Result<f64, ConstitutiveError> {
        match self {
            Self::BrooksCorey(m) => m.gamma(s),
            Self::Tabulated(m) => m.gamma(s),
        }
    }

    fn gamma_eval(&self, s: f64) -> Result<(f64, f64, f64), ConstitutiveError> {
        match self {
            Self::BrooksCorey(m) => m.gamma_eval(s),
            Self::Tabulated(m) => m.gamma_eval(s),
        }
    }

    fn gamma_second_split(&self, z: f64, omz: f64) -> f64 {
        match self {
            Self::BrooksCorey(m) => m.gamma_second_split(z, omz),
            Self::Tabulated(m) => m.gamma_second_split(z, omz),
        }
    }

    fn saturation(&self, p: f64) -> f64 {
        match self {
            Self::BrooksCorey(m) => m.saturation(p),
            Self::Tabulated(m) => m.saturation(p),
        }
    }

    fn endpoint_exponent(&self) -> f64 {
        match self {
            Self::BrooksCorey(m) => m.endpoint_exponent(),
            Self::Tabulated(m) => m.endpoint_exponent(),
        }
    }

    fn psi_closed_form(&self, s: f64) -> Option<f64> {
        match self {
            Self::BrooksCorey(m) => m.psi_closed_form(s),
            Self::Tabulated(m) => m.psi_closed_form(s),
        }
    }
}
