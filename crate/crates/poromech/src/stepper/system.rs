//! The frozen-coefficient step map H and its Newton solve.

use crate::constitutive::{
    f_eps_energy, mobility_floor, phi_from_potentials_with_jacobian, project_k_phi, soft_constraint_g,
    PhaseContentPair, RegularizedModel,
};
use crate::coupled::{body_force, MaterialParams, Spaces, State};
use crate::femcore::assembly::{cell_vector_gradients, stiffness_matrix, Coefficient};
use crate::femcore::{Factorized, LuCache, SparseOperator};

use super::{StepControls, StepperError};

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 20;

/// Frozen mobility/gravity inputs (φ̃, ũ), projected onto K_φ.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenData {
    pub tilde_phi: Vec<PhaseContentPair>,
    pub tilde_u: Vec<f64>,
}

impl FrozenData {
    pub fn new(raw: &[PhaseContentPair], tilde_u: Vec<f64>, params: &MaterialParams) -> Self {
        Self {
            tilde_phi: raw.iter().map(|p| project_k_phi(*p, &params.bounds)).collect(),
            tilde_u,
        }
    }

    pub fn from_state(state: &State, params: &MaterialParams) -> Self {
        Self::new(&state.pairs(), state.u.clone(), params)
    }
}

/// Cellwise frozen coefficients: λ_α = k_ε(s̃_α) K(φ̃)/μ_α and G = g + (∇ũ)ᵀg.
#[derive(Debug, Clone, PartialEq)]
pub struct CellData {
    pub mobility: [Vec<f64>; 2],
    pub gravity: Vec<[f64; 2]>,
}

pub fn frozen_cell_data(spaces: &Spaces, params: &MaterialParams, eps: f64, frozen: &FrozenData) -> CellData {
    let mesh = &*spaces.mesh;
    let grads = cell_vector_gradients(mesh, &frozen.tilde_u);
    let g = params.gravity;
    let d = mesh.dim;
    let mut mobility = [
        Vec::with_capacity(mesh.num_cells()),
        Vec::with_capacity(mesh.num_cells()),
    ];
    let mut gravity = Vec::with_capacity(mesh.num_cells());
    for k in 0..mesh.num_cells() {
        let c = mesh.cell(k);
        let inv = 1.0 / c.len() as f64;
        let pn: f64 = c.iter().map(|v| frozen.tilde_phi[*v].phi_n).sum::<f64>() * inv;
        let pw: f64 = c.iter().map(|v| frozen.tilde_phi[*v].phi_w).sum::<f64>() * inv;
        let pair = PhaseContentPair::new(pn, pw);
        let perm = params.permeability.eval_unchecked(pair.phi());
        let s = [pair.s_n(), pair.s_w()];
        for a in 0..2 {
            mobility[a].push(mobility_floor(eps, s[a]) * perm / params.viscosity(a));
        }
        let mut gk = [g[0], if d == 2 { g[1] } else { 0.0 }];
        for j in 0..d {
            for a in 0..d {
                gk[j] += g[a] * grads[k][a][j];
            }
        }
        gravity.push(gk);
    }
    CellData { mobility, gravity }
}

/// Block offsets of the unknown vector [p_n° | p_w° | u | θ | π].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub nf: usize,
    pub nu: usize,
    pub nv: usize,
}

impl Layout {
    pub fn flow(&self, alpha: usize) -> usize {
        alpha * self.nf
    }
    pub fn u(&self) -> usize {
        2 * self.nf
    }
    pub fn theta(&self) -> usize {
        2 * self.nf + self.nu
    }
    pub fn pi(&self) -> usize {
        2 * self.nf + self.nu + self.nv
    }
    pub fn len(&self) -> usize {
        2 * self.nf + self.nu + 2 * self.nv
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Nodal quantities reconstructed from an unknown vector.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub residual: Vec<f64>,
    pub pairs: Vec<PhaseContentPair>,
    pub jac: Vec<[[f64; 2]; 2]>,
    pub pressure: [Vec<f64>; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    pub fallback_steps: usize,
    pub residual: f64,
    pub trace: Vec<f64>,
}

/// H for fixed (φ*, φ̃, ũ, ε, h).
#[derive(Debug)]
pub struct FrozenSystem<'a> {
    pub spaces: &'a Spaces,
    pub params: &'a MaterialParams,
    pub reg: &'a RegularizedModel,
    pub prev: &'a State,
    pub h: f64,
    pub cells: CellData,
    stiff: [SparseOperator; 2],
    grav: [Vec<f64>; 2],
    load: Vec<f64>,
    layout: Layout,
    jac_const: Vec<(usize, usize, f64)>,
    weights: Vec<f64>,
    lipschitz: f64,
}

impl<'a> FrozenSystem<'a> {
    pub fn new(
        spaces: &'a Spaces,
        params: &'a MaterialParams,
        reg: &'a RegularizedModel,
        prev: &'a State,
        frozen: &FrozenData,
        h: f64,
    ) -> Self {
        let mesh = &*spaces.mesh;
        let eps = reg.eps();
        let cells = frozen_cell_data(spaces, params, eps, frozen);
        let stiff = [0, 1].map(|a| stiffness_matrix(mesh, &Coefficient::PerCell(cells.mobility[a].clone())));
        let nv = mesh.num_vertices();
        let grav = [0, 1].map(|a| {
            let rho = params.density(a);
            let mut out = vec![0.0; nv];
            for k in 0..mesh.num_cells() {
                let g = mesh.geometry(k);
                let c = h * cells.mobility[a][k] * g.measure * rho;
                let gk = cells.gravity[k];
                for (i, v) in mesh.cell(k).iter().enumerate() {
                    out[*v] += c * (gk[0] * g.grads[i][0] + gk[1] * g.grads[i][1]);
                }
            }
            out
        });
        let load = spaces.vector_load(&body_force(&frozen.tilde_phi, params));
        let layout = Layout {
            nf: spaces.flow.num_free(),
            nu: spaces.mech.num_free(),
            nv,
        };
        let m = &spaces.lumped;
        let bm = params.biot_m;

        let mut jac_const = Vec::new();
        let fm = spaces.flow.free_map();
        for a in 0..2 {
            let off = layout.flow(a);
            for (r, c, v) in stiff[a].triplets() {
                if fm[r] != usize::MAX && fm[c] != usize::MAX {
                    jac_const.push((off + fm[r], off + fm[c], h * v));
                }
            }
        }
        for (r, c, v) in spaces.elasticity.triplets() {
            jac_const.push((layout.u() + r, layout.u() + c, v));
        }
        for (i, c, v) in spaces.div.triplets() {
            jac_const.push((layout.u() + c, layout.pi() + i, -v));
            jac_const.push((layout.pi() + i, layout.u() + c, v));
        }
        for i in 0..nv {
            jac_const.push((layout.theta() + i, layout.theta() + i, 2.0 * m[i] * bm));
            jac_const.push((layout.theta() + i, layout.pi() + i, -2.0 * m[i]));
        }

        let mut weights = vec![0.0; layout.len()];
        for a in 0..2 {
            for (j, d) in spaces.flow.free_dofs().iter().enumerate() {
                weights[layout.flow(a) + j] = 1.0 / m[*d];
            }
        }
        for (j, a) in spaces.elasticity.diag().into_iter().enumerate() {
            weights[layout.u() + j] = 1.0 / a;
        }
        for i in 0..nv {
            weights[layout.theta() + i] = 1.0 / (2.0 * m[i] * bm);
            weights[layout.pi() + i] = 1.0 / m[i];
        }
        let bounds = params.bounds;
        let lipschitz = bounds.width() / (4.0 * eps) + 2.0 * bounds.phi_hi / eps;

        Self {
            spaces,
            params,
            reg,
            prev,
            h,
            cells,
            stiff,
            grav,
            load,
            layout,
            jac_const,
            weights,
            lipschitz,
        }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Frozen body-force load on free displacement dofs.
    pub fn load(&self) -> &[f64] {
        &self.load
    }

    pub fn stiffness(&self, alpha: usize) -> &SparseOperator {
        &self.stiff[alpha]
    }

    /// h Σ_K λ_α |K| ρ_α G_K·∇ψ_i on all vertices.
    pub fn gravity_vector(&self, alpha: usize) -> &[f64] {
        &self.grav[alpha]
    }

    /// Unknown vector of a state (pressure offsets from p^D).
    pub fn unknowns_from_state(&self, st: &State) -> Vec<f64> {
        let l = self.layout;
        let mut y = vec![0.0; l.len()];
        for a in 0..2 {
            let pd = &self.params.p_dirichlet[a];
            for (j, d) in self.spaces.flow.free_dofs().iter().enumerate() {
                y[l.flow(a) + j] = st.pressure(a)[*d] - pd[*d];
            }
        }
        y[l.u()..l.theta()].copy_from_slice(&self.spaces.mech.restrict(&st.u));
        y[l.theta()..l.pi()].copy_from_slice(&st.theta);
        y[l.pi()..].copy_from_slice(&st.pi);
        y
    }

    /// Full phase pressures p_α = p^D_α + p_α°.
    pub fn pressures(&self, y: &[f64]) -> [Vec<f64>; 2] {
        let l = self.layout;
        [0, 1].map(|a| {
            let mut p = self.params.p_dirichlet[a].clone();
            for (j, d) in self.spaces.flow.free_dofs().iter().enumerate() {
                p[*d] += y[l.flow(a) + j];
            }
            p
        })
    }

    pub fn evaluate(&self, y: &[f64]) -> Evaluation {
        let l = self.layout;
        let sp = self.spaces;
        let m = &sp.lumped;
        let pressure = self.pressures(y);
        let pi = &y[l.pi()..];
        let theta = &y[l.theta()..l.pi()];
        let mut pairs = Vec::with_capacity(l.nv);
        let mut jac = Vec::with_capacity(l.nv);
        for i in 0..l.nv {
            let (pair, j) = phi_from_potentials_with_jacobian(
                self.reg,
                &self.params.bounds,
                pressure[0][i] - pi[i],
                pressure[1][i] - pi[i],
            );
            pairs.push(pair);
            jac.push(j);
        }
        let mut r = vec![0.0; l.len()];
        for a in 0..2 {
            let full = self.flow_residual_full(a, &pressure[a], &pairs);
            for (j, d) in sp.flow.free_dofs().iter().enumerate() {
                r[l.flow(a) + j] = full[*d];
            }
        }
        let uf = &y[l.u()..l.theta()];
        let au = sp.elasticity.matvec(uf);
        let btp = sp.div.matvec_transpose(pi);
        for j in 0..l.nu {
            r[l.u() + j] = au[j] - btp[j] - self.load[j];
        }
        let bu = sp.div.matvec(uf);
        let bm = self.params.biot_m;
        for i in 0..l.nv {
            r[l.theta() + i] = 2.0 * m[i] * (bm * theta[i] - pi[i]);
            r[l.pi() + i] = m[i] * (-pairs[i].phi() + self.params.phi_r[i] + pi[i] / bm) + bu[i];
        }
        Evaluation {
            residual: r,
            pairs,
            jac,
            pressure,
        }
    }

    fn flow_residual_full(&self, a: usize, p: &[f64], pairs: &[PhaseContentPair]) -> Vec<f64> {
        let m = &self.spaces.lumped;
        let kp = self.stiff[a].matvec(p);
        let prev = self.prev.content(a);
        (0..p.len())
            .map(|i| {
                let phi = if a == 0 { pairs[i].phi_n } else { pairs[i].phi_w };
                m[i] * (phi - prev[i]) + self.h * kp[i] - self.grav[a][i]
            })
            .collect()
    }

    /// Flow residual summed over the flow Dirichlet vertices (weak boundary flux).
    pub fn boundary_flux(&self, ev: &Evaluation) -> [f64; 2] {
        let sp = self.spaces;
        [0, 1].map(|a| {
            let full = self.flow_residual_full(a, &ev.pressure[a], &ev.pairs);
            (0..full.len())
                .filter(|d| sp.flow.is_constrained(*d))
                .map(|d| full[d])
                .sum()
        })
    }

    pub fn residual(&self, y: &[f64]) -> Vec<f64> {
        self.evaluate(y).residual
    }

    /// max_k |w_k r_k|.
    pub fn scaled_norm(&self, r: &[f64]) -> f64 {
        r.iter()
            .zip(&self.weights)
            .map(|(a, w)| (a * w).abs())
            .fold(0.0, f64::max)
    }

    fn merit(&self, r: &[f64]) -> f64 {
        r.iter()
            .zip(&self.weights)
            .map(|(a, w)| (a * w).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Jacobian at `ev`; with `lscheme` the content Jacobian is replaced by L·I.
    pub fn jacobian(&self, ev: &Evaluation, lscheme: bool) -> SparseOperator {
        let l = self.layout;
        let m = &self.spaces.lumped;
        let fm = self.spaces.flow.free_map();
        let mut t = self.jac_const.clone();
        t.reserve(8 * l.nv);
        let inv_m = 1.0 / self.params.biot_m;
        for i in 0..l.nv {
            let j = if lscheme {
                [[self.lipschitz, 0.0], [0.0, self.lipschitz]]
            } else {
                ev.jac[i]
            };
            let fi = fm[i];
            let pi_row = l.pi() + i;
            if fi != usize::MAX {
                for a in 0..2 {
                    for b in 0..2 {
                        t.push((l.flow(a) + fi, l.flow(b) + fi, m[i] * j[a][b]));
                    }
                    t.push((l.flow(a) + fi, pi_row, -m[i] * (j[a][0] + j[a][1])));
                    t.push((pi_row, l.flow(a) + fi, -m[i] * (j[0][a] + j[1][a])));
                }
            }
            let sum = j[0][0] + j[0][1] + j[1][0] + j[1][1];
            t.push((pi_row, pi_row, m[i] * (sum + inv_m)));
        }
        SparseOperator::from_triplets(l.len(), l.len(), t, false)
    }

    /// Sets u = A⁻¹(Bᵀπ + F) and θ = π/M, so that r_u = r_θ = 0.
    pub fn complete(&self, y: &mut [f64]) -> Result<(), StepperError> {
        let l = self.layout;
        let mut rhs = self.spaces.div.matvec_transpose(&y[l.pi()..]);
        for (r, f) in rhs.iter_mut().zip(&self.load) {
            *r += f;
        }
        let u = self.spaces.elasticity_factor.solve(&rhs)?;
        y[l.u()..l.theta()].copy_from_slice(&u);
        let inv_m = 1.0 / self.params.biot_m;
        for i in 0..l.nv {
            y[l.theta() + i] = y[l.pi() + i] * inv_m;
        }
        Ok(())
    }

    /// Convex potential in (p°, π) whose gradient is (r_flow, r_π) when u and θ are eliminated.
    ///
    /// Ψ = Σ m_i F_ε*(p_i - π_i) - Σ m_i φ*·p_i + (h/2) Σ_α pᵀK_α p - gravity·p
    ///     + Σ m_i (φ_r π + π²/(2M)) + ½uᵀAu.
    pub fn potential(&self, y: &[f64], ev: &Evaluation) -> Result<f64, StepperError> {
        let l = self.layout;
        let m = &self.spaces.lumped;
        let pi = &y[l.pi()..];
        let bm = self.params.biot_m;
        let mut acc = 0.0;
        for i in 0..l.nv {
            let pair = ev.pairs[i];
            let f = f_eps_energy(self.reg, &self.params.bounds, pair)?.value;
            let yn = ev.pressure[0][i] - pi[i];
            let yw = ev.pressure[1][i] - pi[i];
            let conj = pair.phi_n * yn + pair.phi_w * yw - f;
            let store = self.prev.phi_n[i] * ev.pressure[0][i] + self.prev.phi_w[i] * ev.pressure[1][i];
            acc += m[i] * (conj - store + self.params.phi_r[i] * pi[i] + 0.5 * pi[i] * pi[i] / bm);
        }
        for a in 0..2 {
            let p = &ev.pressure[a];
            let kp = self.stiff[a].matvec(p);
            for i in 0..l.nv {
                acc += 0.5 * self.h * p[i] * kp[i] - self.grav[a][i] * p[i];
            }
        }
        acc += 0.5 * self.spaces.elasticity.quadratic_form(&y[l.u()..l.theta()]);
        Ok(acc)
    }

    /// Directional derivative of Ψ along `d` (flow and π blocks).
    fn slope(&self, r: &[f64], d: &[f64]) -> f64 {
        let l = self.layout;
        let flow: f64 = (0..2 * l.nf).map(|k| r[k] * d[k]).sum();
        let pi: f64 = (l.pi()..l.len()).map(|k| r[k] * d[k]).sum();
        flow + pi
    }

    /// Backtracking along `d` from `y`; returns the accepted point.
    fn line_search(
        &self,
        y: &[f64],
        ev: &Evaluation,
        psi0: f64,
        d: &[f64],
    ) -> Result<Option<(Vec<f64>, Evaluation, f64)>, StepperError> {
        let slope = self.slope(&ev.residual, d);
        let merit0 = self.merit(&ev.residual);
        let roundoff = 1e-13 * (1.0 + psi0.abs());
        let mut alpha = 1.0;
        for _ in 0..=MAX_HALVINGS {
            let mut cand: Vec<f64> = y.iter().zip(d).map(|(a, b)| a + alpha * b).collect();
            self.complete(&mut cand)?;
            let ce = self.evaluate(&cand);
            let psi = self.potential(&cand, &ce)?;
            let descent = slope < 0.0 && psi <= psi0 + ARMIJO * alpha * slope;
            let flat = (psi - psi0).abs() <= roundoff && self.merit(&ce.residual) <= (1.0 - ARMIJO * alpha) * merit0;
            if descent || flat {
                return Ok(Some((cand, ce, psi)));
            }
            alpha *= 0.5;
        }
        Ok(None)
    }

    /// Damped Newton from `y0`: u and θ are eliminated at every iterate and the step
    /// is backtracked on Ψ; the L-scheme direction is the fallback.
    pub fn solve(
        &self,
        y0: Vec<f64>,
        controls: &StepControls,
        cache: &mut LuCache,
    ) -> Result<(Vec<f64>, Evaluation, NewtonReport), StepperError> {
        let mut y = y0;
        self.complete(&mut y)?;
        let mut ev = self.evaluate(&y);
        let mut psi = self.potential(&y, &ev)?;
        let mut norm = self.scaled_norm(&ev.residual);
        let mut trace = vec![norm];
        let mut iterations = 0;
        let mut fallback_steps = 0;
        let fail = |trace: Vec<f64>, iterations| StepperError::NewtonNotConverged {
            best: trace.iter().copied().fold(f64::INFINITY, f64::min),
            iterations,
            trace,
        };
        while !(norm <= controls.newton_tol) {
            if iterations >= controls.newton_max || !norm.is_finite() {
                return Err(fail(trace, iterations));
            }
            iterations += 1;
            let d = self.newton_direction(&ev, false, cache)?;
            let mut step = self.line_search(&y, &ev, psi, &d)?;
            if step.is_none() {
                fallback_steps += 1;
                let d = self.newton_direction(&ev, true, cache)?;
                step = self.line_search(&y, &ev, psi, &d)?;
            }
            let Some((ny, ne, np)) = step else {
                return Err(fail(trace, iterations));
            };
            y = ny;
            ev = ne;
            psi = np;
            norm = self.scaled_norm(&ev.residual);
            trace.push(norm);
        }
        if controls.polish && norm > 0.0 {
            if let Ok(delta) = self.newton_direction(&ev, false, cache) {
                let mut cand: Vec<f64> = y.iter().zip(&delta).map(|(a, d)| a + d).collect();
                self.complete(&mut cand)?;
                let ce = self.evaluate(&cand);
                let cn = self.scaled_norm(&ce.residual);
                if cn < norm {
                    y = cand;
                    ev = ce;
                    norm = cn;
                    trace.push(norm);
                }
            }
        }
        Ok((
            y,
            ev,
            NewtonReport {
                iterations,
                fallback_steps,
                residual: norm,
                trace,
            },
        ))
    }

    fn newton_direction(&self, ev: &Evaluation, lscheme: bool, cache: &mut LuCache) -> Result<Vec<f64>, StepperError> {
        let jac = self.jacobian(ev, lscheme);
        let f = Factorized::lu_cached(&jac, cache)?;
        let rhs: Vec<f64> = ev.residual.iter().map(|v| -v).collect();
        let (x, _) = f.solve_with_residual(&rhs)?;
        Ok(x)
    }

    /// Assembles the state carried by `y` (χ = G_ε(φ)).
    pub fn state_from(&self, y: &[f64], ev: &Evaluation) -> Result<State, StepperError> {
        let l = self.layout;
        let b = &self.params.bounds;
        let eps = self.reg.eps();
        let chi = ev
            .pairs
            .iter()
            .map(|p| soft_constraint_g(b, eps, p.phi()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(State {
            phi_n: ev.pairs.iter().map(|p| p.phi_n).collect(),
            phi_w: ev.pairs.iter().map(|p| p.phi_w).collect(),
            u: self.spaces.mech.extend_zero(&y[l.u()..l.theta()]),
            theta: y[l.theta()..l.pi()].to_vec(),
            pi: y[l.pi()..].to_vec(),
            chi,
            p_n: ev.pressure[0].clone(),
            p_w: ev.pressure[1].clone(),
            eps,
        })
    }
}
