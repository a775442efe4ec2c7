//! TOML scenario documents. Keys carry their units (`*_pa`, `*_m`, ...); the
//! default is a nondimensional setting with all scales 1.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use evalexpr::{ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};
use serde::{Deserialize, Serialize};

use crate::constitutive::{CapillaryModel, PhaseContentPair, PorosityBounds, Tabulated};
use crate::coupled::{MaterialParams, PermeabilityLaw, Spaces};
use crate::femcore::{generate_mesh, Mesh, MeshSpec};
use crate::stepper::StepControls;

use super::ScenarioError;

/// Scalar field given as a constant, an expression in `x`, `y` (and `pi`), or a nodal file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Constant(f64),
    Expression(String),
    File { file: PathBuf },
}

impl From<f64> for FieldSpec {
    fn from(v: f64) -> Self {
        Self::Constant(v)
    }
}

impl FieldSpec {
    /// Nodal values on `mesh`; relative file paths resolve against `base`.
    pub fn eval(&self, what: &str, mesh: &Mesh, base: &Path) -> Result<Vec<f64>, ScenarioError> {
        let bad = |m: String| ScenarioError::Field {
            field: what.to_string(),
            message: m,
        };
        match self {
            Self::Constant(v) => Ok(vec![*v; mesh.num_vertices()]),
            Self::Expression(src) => {
                let tree: Node<DefaultNumericTypes> =
                    evalexpr::build_operator_tree(src).map_err(|e| bad(format!("`{src}`: {e}")))?;
                let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
                ctx.set_value("pi".into(), Value::from_float(std::f64::consts::PI))
                    .map_err(|e| bad(e.to_string()))?;
                mesh.coords
                    .iter()
                    .map(|x| {
                        ctx.set_value("x".into(), Value::from_float(x[0]))
                            .map_err(|e| bad(e.to_string()))?;
                        ctx.set_value("y".into(), Value::from_float(x[1]))
                            .map_err(|e| bad(e.to_string()))?;
                        tree.eval_number_with_context(&ctx)
                            .map_err(|e| bad(format!("`{src}`: {e}")))
                    })
                    .collect()
            }
            Self::File { file } => {
                let path = if file.is_absolute() {
                    file.clone()
                } else {
                    base.join(file)
                };
                let text = std::fs::read_to_string(&path).map_err(|e| ScenarioError::Io {
                    path: path.clone(),
                    source: e,
                })?;
                let vals = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .map(|l| {
                        l.parse::<f64>()
                            .map_err(|e| bad(format!("{}: `{l}`: {e}", path.display())))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if vals.len() != mesh.num_vertices() {
                    return Err(bad(format!(
                        "{} holds {} values for {} vertices",
                        path.display(),
                        vals.len(),
                        mesh.num_vertices()
                    )));
                }
                Ok(vals)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeshConfig {
    Interval {
        n: usize,
        #[serde(default = "one")]
        length_m: f64,
    },
    Rectangle {
        nx: usize,
        ny: usize,
        #[serde(default = "one")]
        lx_m: f64,
        #[serde(default = "one")]
        ly_m: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl MeshConfig {
    pub fn spec(&self) -> MeshSpec {
        match *self {
            Self::Interval { n, length_m } => MeshSpec::Interval { n, length: length_m },
            Self::Rectangle { nx, ny, lx_m, ly_m } => MeshSpec::Rectangle {
                nx,
                ny,
                lx: lx_m,
                ly: ly_m,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    #[serde(default)]
    pub flow_dirichlet: Vec<String>,
    pub mechanics_dirichlet: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PermeabilityConfig {
    KozenyCarman { k0_m2: f64 },
    Constant { k0_m2: f64 },
}

impl PermeabilityConfig {
    pub fn law(&self) -> PermeabilityLaw {
        match *self {
            Self::KozenyCarman { k0_m2 } => PermeabilityLaw::KozenyCarman { k0: k0_m2 },
            Self::Constant { k0_m2 } => PermeabilityLaw::Constant { k0: k0_m2 },
        }
    }
}

fn default_permeability() -> PermeabilityConfig {
    PermeabilityConfig::KozenyCarman { k0_m2: 1.0 }
}

fn zero_field() -> FieldSpec {
    FieldSpec::Constant(0.0)
}

fn zero_force() -> [FieldSpec; 2] {
    [zero_field(), zero_field()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    #[serde(default = "one")]
    pub viscosity_n_pa_s: f64,
    #[serde(default = "one")]
    pub viscosity_w_pa_s: f64,
    #[serde(default = "one")]
    pub density_n_kg_m3: f64,
    #[serde(default = "one")]
    pub density_w_kg_m3: f64,
    #[serde(default)]
    pub gravity_m_s2: [f64; 2],
    #[serde(default = "one")]
    pub lame_mu_pa: f64,
    #[serde(default = "one")]
    pub lame_lambda_pa: f64,
    #[serde(default = "one")]
    pub biot_coefficient: f64,
    #[serde(default = "one")]
    pub biot_modulus_pa: f64,
    pub porosity_min: f64,
    pub porosity_max: f64,
    pub porosity_rest: FieldSpec,
    #[serde(default = "zero_field")]
    pub solid_density_kg_m3: FieldSpec,
    #[serde(default = "zero_force")]
    pub external_force_n_m3: [FieldSpec; 2],
    #[serde(default = "default_permeability")]
    pub permeability: PermeabilityConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CapillaryConfig {
    BrooksCorey {
        entry_pressure_pa: f64,
        lambda_bc: f64,
        #[serde(default)]
        gamma0_pa: f64,
    },
    /// γ'' at saturation nodes; γ' and γ are anchored at s = 0.
    Tabulated {
        saturation: Vec<f64>,
        gamma_second_pa: Vec<f64>,
        #[serde(default)]
        gamma0_pa: f64,
        #[serde(default)]
        gamma_prime0_pa: f64,
    },
}

impl CapillaryConfig {
    pub fn model(&self) -> Result<CapillaryModel, ScenarioError> {
        Ok(match self {
            Self::BrooksCorey {
                entry_pressure_pa,
                lambda_bc,
                gamma0_pa,
            } => CapillaryModel::BrooksCorey(crate::constitutive::BrooksCorey::new(
                *entry_pressure_pa,
                *lambda_bc,
                *gamma0_pa,
            )?),
            Self::Tabulated {
                saturation,
                gamma_second_pa,
                gamma0_pa,
                gamma_prime0_pa,
            } => CapillaryModel::Tabulated(Tabulated::new(
                saturation.clone(),
                gamma_second_pa.clone(),
                *gamma0_pa,
                *gamma_prime0_pa,
            )?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub phi_n: FieldSpec,
    pub phi_w: FieldSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletConfig {
    #[serde(default = "zero_field")]
    pub p_n_pa: FieldSpec,
    #[serde(default = "zero_field")]
    pub p_w_pa: FieldSpec,
}

impl Default for DirichletConfig {
    fn default() -> Self {
        Self {
            p_n_pa: zero_field(),
            p_w_pa: zero_field(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub steps: usize,
    pub seed: u64,
    /// 0 selects every step for N ≤ 100, else every ⌈N/100⌉
    pub snapshot_every: usize,
    pub audit_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            steps: 10,
            seed: 1,
            snapshot_every: 0,
            audit_samples: 16,
        }
    }
}

impl RunConfig {
    pub fn cadence(&self) -> usize {
        if self.snapshot_every > 0 {
            self.snapshot_every
        } else if self.steps <= 100 {
            1
        } else {
            self.steps.div_ceil(100)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub name: String,
    pub mesh: MeshConfig,
    pub boundary: BoundaryConfig,
    pub material: MaterialConfig,
    pub capillary: CapillaryConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub dirichlet: DirichletConfig,
    #[serde(default)]
    pub controls: StepControls,
    #[serde(default)]
    pub run: RunConfig,
    /// directory for relative field files
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Parses a scenario document; unknown keys are rejected.
pub fn load_config(text: &str) -> Result<Config, ScenarioError> {
    let value: toml::Table = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    config_from_table(value)
}

pub(crate) fn config_from_table(table: toml::Table) -> Result<Config, ScenarioError> {
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ScenarioError::Parse(e.to_string()))
}

/// Reads a config file; field files are resolved against its directory.
pub fn load_config_file(path: &Path) -> Result<(Config, String), ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut cfg = load_config(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, text))
}

/// Everything a run needs, evaluated on the mesh.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub mesh: Arc<Mesh>,
    pub spaces: Spaces,
    pub params: MaterialParams,
    pub capillary: CapillaryModel,
    pub phi0: Vec<PhaseContentPair>,
    pub controls: StepControls,
    pub run: RunConfig,
    pub validation: super::ValidationReport,
}

/// Nodal data of a config without the solver-side checks.
pub(crate) struct NodalData {
    pub mesh: Arc<Mesh>,
    pub params: MaterialParams,
    pub phi0: Vec<PhaseContentPair>,
}

impl Config {
    pub(crate) fn nodal_data(&self) -> Result<NodalData, ScenarioError> {
        let mesh = Arc::new(generate_mesh(&self.mesh.spec())?);
        let base = &self.base_dir;
        let m = &self.material;
        let phi_r = m.porosity_rest.eval("material.porosity_rest", &mesh, base)?;
        let rho_sr = m
            .solid_density_kg_m3
            .eval("material.solid_density_kg_m3", &mesh, base)?;
        let fx = m.external_force_n_m3[0].eval("material.external_force_n_m3[0]", &mesh, base)?;
        let fy = m.external_force_n_m3[1].eval("material.external_force_n_m3[1]", &mesh, base)?;
        let pn = self.dirichlet.p_n_pa.eval("dirichlet.p_n_pa", &mesh, base)?;
        let pw = self.dirichlet.p_w_pa.eval("dirichlet.p_w_pa", &mesh, base)?;
        let phi_n = self.initial.phi_n.eval("initial.phi_n", &mesh, base)?;
        let phi_w = self.initial.phi_w.eval("initial.phi_w", &mesh, base)?;
        // placeholder bounds keep construction total; validation reports bad bounds
        let bounds = PorosityBounds::new(m.porosity_min, m.porosity_max).unwrap_or(PorosityBounds {
            phi_lo: m.porosity_min,
            phi_hi: m.porosity_max,
        });
        let params = MaterialParams {
            viscosity_n: m.viscosity_n_pa_s,
            viscosity_w: m.viscosity_w_pa_s,
            density_n: m.density_n_kg_m3,
            density_w: m.density_w_kg_m3,
            gravity: m.gravity_m_s2,
            lame_mu: m.lame_mu_pa,
            lame_lambda: m.lame_lambda_pa,
            biot_b: m.biot_coefficient,
            biot_m: m.biot_modulus_pa,
            bounds,
            permeability: m.permeability.law(),
            phi_r,
            rho_sr,
            f_ext: fx.into_iter().zip(fy).map(|(a, b)| [a, b]).collect(),
            p_dirichlet: [pn, pw],
        };
        let phi0 = phi_n
            .into_iter()
            .zip(phi_w)
            .map(|(a, b)| PhaseContentPair::new(a, b))
            .collect();
        Ok(NodalData { mesh, params, phi0 })
    }

    /// Builds the scenario after validation has passed.
    pub fn build(&self) -> Result<Scenario, ScenarioError> {
        let report = super::validate(self);
        if !report.is_ok() {
            return Err(ScenarioError::Validation(report));
        }
        let NodalData { mesh, params, phi0 } = self.nodal_data()?;
        let spaces = Spaces::new(
            mesh.clone(),
            &self.boundary.flow_dirichlet,
            &self.boundary.mechanics_dirichlet,
            &params,
        )?;
        Ok(Scenario {
            mesh,
            spaces,
            params,
            capillary: self.capillary.model()?,
            phi0,
            controls: self.controls.clone(),
            run: self.run.clone(),
            validation: report,
        })
    }
}
