use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coupled::State;
use crate::diagnostics::EnergyLedger;
use crate::stepper::LevelRecord;

use super::ScenarioError;

pub const SERIES_COLUMNS: [&str; 14] = [
    "t",
    "F_f",
    "F_s",
    "F_g",
    "F_eps",
    "D",
    "step_inequality_residual",
    "mass_n",
    "mass_w",
    "dual_norm_n",
    "dual_norm_w",
    "graph_max_distance",
    "newton_iters",
    "fp_iters",
];

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub ledger: EnergyLedger,
    pub mass: [f64; 2],
    pub dual_norm: [f64; 2],
    pub graph_max_distance: f64,
    pub newton_iters: usize,
    pub fp_iters: usize,
}

/// 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl SeriesRow {
    pub fn to_csv(&self) -> String {
        let l = &self.ledger;
        let floats = [
            self.t,
            l.f_f,
            l.f_s,
            l.f_g,
            l.f_eps,
            l.dissipation,
            l.step_inequality_residual,
            self.mass[0],
            self.mass[1],
            self.dual_norm[0],
            self.dual_norm[1],
            self.graph_max_distance,
        ];
        let mut s: Vec<String> = floats.iter().map(|v| fmt_float(*v)).collect();
        s.push(self.newton_iters.to_string());
        s.push(self.fp_iters.to_string());
        s.join(",")
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ScenarioError + '_ {
    move |e| ScenarioError::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

/// Streams `series.csv`, flushing after every row.
pub struct SeriesWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl SeriesWriter {
    pub fn create(dir: &Path) -> Result<Self, ScenarioError> {
        let path = dir.join("series.csv");
        let f = File::create(&path).map_err(io_err(&path))?;
        let mut w = Self {
            out: BufWriter::new(f),
            path,
        };
        writeln!(w.out, "{}", SERIES_COLUMNS.join(",")).map_err(io_err(&w.path))?;
        w.out.flush().map_err(io_err(&w.path))?;
        Ok(w)
    }

    pub fn push(&mut self, row: &SeriesRow) -> Result<(), ScenarioError> {
        writeln!(self.out, "{}", row.to_csv()).map_err(io_err(&self.path))?;
        self.out.flush().map_err(io_err(&self.path))
    }
}

/// Mesh-field text: `# field <name>` then one line per vertex (d values for vectors).
pub fn field_text(state: &State, dim: usize) -> String {
    let mut s = String::new();
    let scalar = |s: &mut String, name: &str, v: &[f64]| {
        let _ = writeln!(s, "# field {name}");
        for x in v {
            let _ = writeln!(s, "{}", fmt_float(*x));
        }
    };
    scalar(&mut s, "phi_n", &state.phi_n);
    scalar(&mut s, "phi_w", &state.phi_w);
    let _ = writeln!(s, "# field u");
    for c in state.u.chunks(dim) {
        let line: Vec<String> = c.iter().map(|v| fmt_float(*v)).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    scalar(&mut s, "theta", &state.theta);
    scalar(&mut s, "pi", &state.pi);
    scalar(&mut s, "chi", &state.chi);
    scalar(&mut s, "p_n", &state.p_n);
    scalar(&mut s, "p_w", &state.p_w);
    s
}

/// (name, rows) pairs in file order.
pub type FieldRows = Vec<(String, Vec<Vec<f64>>)>;

/// Parses [`field_text`] output.
pub fn parse_field_text(text: &str) -> Result<FieldRows, ScenarioError> {
    let mut out: FieldRows = Vec::new();
    for line in text.lines() {
        if let Some(name) = line.strip_prefix("# field ") {
            out.push((name.trim().to_string(), Vec::new()));
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cur = out
            .last_mut()
            .ok_or_else(|| ScenarioError::Parse("field data before a `# field` header".into()))?;
        let row = line
            .split_whitespace()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| ScenarioError::Parse(format!("`{v}`: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        cur.1.push(row);
    }
    Ok(out)
}

pub fn write_file(path: &Path, text: &str) -> Result<(), ScenarioError> {
    std::fs::write(path, text).map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEntry {
    pub step: usize,
    pub t: f64,
    pub newton_iters: usize,
    pub fp_iters: usize,
    pub levels: Vec<LevelRecord>,
    pub ledger: EnergyLedger,
    pub identity_defect: f64,
    pub boundary_flux: [f64; 2],
}

/// Deterministic run summary; wall-clock data goes to `timing.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub name: String,
    pub config_sha256: String,
    pub code_version: String,
    pub seed: u64,
    pub steps_requested: usize,
    pub steps_completed: usize,
    pub status: String,
    pub failure: Option<String>,
    pub eps_schedule: Vec<f64>,
    pub h: f64,
    pub c1_estimate: Option<f64>,
    pub weak_coupling_margin: Option<f64>,
    pub max_relative_mass_drift: [f64; 2],
    pub gronwall: Option<crate::diagnostics::GronwallConstants>,
    pub snapshots: Vec<String>,
    pub steps: Vec<StepEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub step_seconds: Vec<f64>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ScenarioError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    write_file(path, &(text + "\n"))
}

pub fn sha256_hex(text: &str) -> String {
    use sha2::{Digest, Sha256};
    let d = Sha256::digest(text.as_bytes());
    d.iter().map(|b| format!("{b:02x}")).collect()
}
