use serde::{Deserialize, Serialize};

use crate::coupled::{weak_coupling_audit, Spaces, WeakCouplingReport};

use super::config::{CapillaryConfig, Config};

/// One failed (or warned) clause.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub label: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
    pub weak_coupling: Option<WeakCouplingReport>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn fail(&mut self, label: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            label: label.into(),
            message: message.into(),
        });
    }

    fn warn(&mut self, label: &str, message: impl Into<String>) {
        self.warnings.push(Violation {
            label: label.into(),
            message: message.into(),
        });
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for v in &self.violations {
            writeln!(f, "error ({}): {}", v.label, v.message)?;
        }
        for v in &self.warnings {
            writeln!(f, "warning ({}): {}", v.label, v.message)?;
        }
        Ok(())
    }
}

/// (label, clause) pairs checked by [`validate`], one line per rule.
pub const RULES: &[(&str, &str)] = &[
    ("H1", "viscosities and densities are positive constants"),
    ("H1", "gravity is a finite constant vector"),
    ("H1", "Lame coefficients and the Biot modulus are positive"),
    ("H1", "Biot coefficient belongs to (0,1]"),
    ("H1", "porosity bounds satisfy 0 < porosity_min < porosity_max < 1"),
    ("H1", "rest porosity lies within the porosity bounds at every vertex"),
    ("H2", "capillary energy is strictly convex and increasing with sqrt(1-s) gamma'' integrable (Brooks-Corey: lambda_bc > 2)"),
    ("H3", "permeability is positive and bounded on the porosity bounds"),
    ("H4", "initial contents are nonnegative with porosity within the bounds"),
    ("H5", "Dirichlet pressures are finite; time independence holds by construction"),
    ("H6", "mechanics Dirichlet boundary is nonempty and all boundary markers exist"),
    ("H7", "weak coupling lambda > M b^2 C1 with C1 estimated by sampling (warning only)"),
    ("H8", "solid reference density and external force are finite"),
    ("controls", "time step, eps schedule and solver tolerances are admissible"),
];

fn finite_pos(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

/// Checks every machine-checkable assumption and reports all violations at once.
pub fn validate(cfg: &Config) -> ValidationReport {
    let mut r = ValidationReport::default();
    let m = &cfg.material;

    for (name, v) in [
        ("viscosity_n_pa_s", m.viscosity_n_pa_s),
        ("viscosity_w_pa_s", m.viscosity_w_pa_s),
        ("density_n_kg_m3", m.density_n_kg_m3),
        ("density_w_kg_m3", m.density_w_kg_m3),
    ] {
        if !finite_pos(v) {
            r.fail("H1", format!("{name} = {v} must be a positive constant"));
        }
    }
    if m.gravity_m_s2.iter().any(|g| !g.is_finite()) {
        r.fail("H1", "gravity_m_s2 must be finite");
    }
    for (name, v) in [
        ("lame_mu_pa", m.lame_mu_pa),
        ("lame_lambda_pa", m.lame_lambda_pa),
        ("biot_modulus_pa", m.biot_modulus_pa),
    ] {
        if !finite_pos(v) {
            r.fail("H1", format!("{name} = {v} must be positive"));
        }
    }
    if !(m.biot_coefficient > 0.0 && m.biot_coefficient <= 1.0) {
        r.fail(
            "H1",
            format!("biot_coefficient = {} must belong to (0,1]", m.biot_coefficient),
        );
    }
    let bounds_ok = m.porosity_min > 0.0 && m.porosity_min < m.porosity_max && m.porosity_max < 1.0;
    if !bounds_ok {
        r.fail(
            "H1",
            format!(
                "porosity bounds ({}, {}) must satisfy 0 < min < max < 1",
                m.porosity_min, m.porosity_max
            ),
        );
    }

    match &cfg.capillary {
        CapillaryConfig::BrooksCorey {
            entry_pressure_pa,
            lambda_bc,
            ..
        } => {
            if !finite_pos(*entry_pressure_pa) {
                r.fail(
                    "H2",
                    format!("entry_pressure_pa = {entry_pressure_pa} must be positive"),
                );
            }
            if !(*lambda_bc > 2.0 && lambda_bc.is_finite()) {
                r.fail(
                    "H2",
                    format!("lambda_bc = {lambda_bc}: sqrt(1-s) gamma'' is integrable on (0,1) only for lambda_bc > 2"),
                );
            }
        }
        CapillaryConfig::Tabulated { .. } => {
            if let Err(e) = cfg.capillary.model() {
                r.fail("H2", e.to_string());
            }
        }
    }

    if !finite_pos(m.permeability.law().k0()) {
        r.fail(
            "H3",
            format!("permeability k0_m2 = {} must be positive", m.permeability.law().k0()),
        );
    }

    if cfg.boundary.mechanics_dirichlet.is_empty() {
        r.fail("H6", "mechanics_dirichlet must name at least one boundary marker");
    }

    if let Err(e) = cfg.controls.validate() {
        r.fail("controls", e.to_string());
    } else if cfg.controls.smallness_load() > 0.5 {
        r.warn(
            "controls",
            format!(
                "h = {} uses {:.0}% of the configured smallness caps",
                cfg.controls.h,
                100.0 * cfg.controls.smallness_load()
            ),
        );
    }

    let data = match cfg.nodal_data() {
        Ok(d) => d,
        Err(e) => {
            r.fail("input", e.to_string());
            return r;
        }
    };
    let mesh = &data.mesh;
    for marker in cfg
        .boundary
        .flow_dirichlet
        .iter()
        .chain(&cfg.boundary.mechanics_dirichlet)
    {
        if mesh.marker_id(marker).is_none() {
            r.fail("H6", format!("unknown boundary marker `{marker}`"));
        }
    }
    let p = &data.params;
    if bounds_ok {
        if let Some((i, v)) = p.phi_r.iter().enumerate().find(|(_, v)| !p.bounds.contains(**v)) {
            r.fail(
                "H1",
                format!("porosity_rest = {v} at vertex {i} lies outside the porosity bounds"),
            );
        }
        if let Some((i, c)) = data
            .phi0
            .iter()
            .enumerate()
            .find(|(_, c)| !(c.phi_n >= 0.0 && c.phi_w >= 0.0 && p.bounds.contains(c.phi())))
        {
            r.fail(
                "H4",
                format!(
                    "initial contents ({}, {}) at vertex {i} must be nonnegative with porosity in the bounds",
                    c.phi_n, c.phi_w
                ),
            );
        }
    }
    if p.p_dirichlet.iter().flatten().any(|v| !v.is_finite()) {
        r.fail("H5", "Dirichlet pressures must be finite");
    }
    if p.rho_sr.iter().any(|v| !v.is_finite()) || p.f_ext.iter().flatten().any(|v| !v.is_finite()) {
        r.fail("H8", "solid_density_kg_m3 and external_force_n_m3 must be finite");
    }

    if r.is_ok() {
        match Spaces::new(
            mesh.clone(),
            &cfg.boundary.flow_dirichlet,
            &cfg.boundary.mechanics_dirichlet,
            p,
        ) {
            Ok(spaces) => match weak_coupling_audit(&spaces, p, cfg.run.audit_samples.max(1), cfg.run.seed) {
                Ok(w) => {
                    if !w.satisfied {
                        r.warn(
                            "H7",
                            format!(
                                "lambda = {} does not exceed M b^2 C1 = {} (C1 estimate {})",
                                p.lame_lambda,
                                p.lame_lambda - w.margin,
                                w.c1_estimate
                            ),
                        );
                    }
                    r.weak_coupling = Some(w);
                }
                Err(e) => r.warn("H7", format!("weak coupling audit failed: {e}")),
            },
            Err(e) => r.fail("H6", e.to_string()),
        }
    }
    r
}
