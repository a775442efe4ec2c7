use std::path::Path;
use std::time::Instant;

use crate::constitutive::RegularizedModel;
use crate::coupled::{init_state, State};
use crate::diagnostics::{
    dissipation, dual_increments, energy_audit, gronwall_constants, helmholtz_energy, mass_balance, phase_totals,
};
use crate::femcore::DualNorm;
use crate::stepper::{run_transient, StepRecord, StepperError};

use super::config::{Config, Scenario};
use super::output::{
    field_text, sha256_hex, write_file, write_json, RunManifest, SeriesRow, SeriesWriter, StepEntry, Timing,
};
use super::ScenarioError;

#[derive(Debug)]
pub struct RunReport {
    pub manifest: RunManifest,
    pub rows: Vec<SeriesRow>,
    pub states: Vec<State>,
    pub failure: Option<StepperError>,
}

/// Runs the transient problem and streams outputs into `out`.
pub fn run_scenario(cfg: &Config, config_text: &str, out: &Path, quiet: bool) -> Result<RunReport, ScenarioError> {
    let sc = cfg.build()?;
    run_built(cfg, &sc, config_text, out, quiet)
}

fn snapshot_name(step: usize) -> String {
    format!("fields/step_{step:06}.txt")
}

pub(crate) fn run_built(
    cfg: &Config,
    sc: &Scenario,
    config_text: &str,
    out: &Path,
    quiet: bool,
) -> Result<RunReport, ScenarioError> {
    let started = Instant::now();
    let fields = out.join("fields");
    std::fs::create_dir_all(&fields).map_err(|e| ScenarioError::Io {
        path: fields.clone(),
        source: e,
    })?;
    let sp = &sc.spaces;
    let dim = sp.dim();
    let dirichlet: Vec<&str> = cfg.boundary.flow_dirichlet.iter().map(String::as_str).collect();
    write_file(&out.join("mesh.txt"), &sc.mesh.to_text(&dirichlet))?;
    write_file(&out.join("config.toml"), config_text)?;

    let eps_final = *sc.controls.eps_schedule.last().expect("validated schedule is nonempty");
    let reg = RegularizedModel::new(sc.capillary.clone(), eps_final)?;
    let init = init_state(&sc.phi0, &sc.params, sp, &reg)?;
    let dual = DualNorm::new(&sp.flow)?;
    let cadence = sc.run.cadence();
    let n_steps = sc.run.steps;

    let mut snapshots = vec![snapshot_name(0)];
    write_file(&out.join(&snapshots[0]), &field_text(&init, dim))?;
    let mut series = SeriesWriter::create(out)?;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut step_seconds = Vec::new();
    let mut energies = vec![helmholtz_energy(&init, &sc.params, sp, &reg)?.f_eps];
    let mut times = vec![0.0];
    let mut io_error: Option<ScenarioError> = None;
    let mut tick = Instant::now();

    let mut on_step = |rec: &StepRecord, prev: &State, next: &State| -> Result<(), ScenarioError> {
        let mut ledger = helmholtz_energy(next, &sc.params, sp, &reg)?;
        let d = dissipation(next, &sc.params, sp);
        let audit = energy_audit(prev, next, &rec.frozen, sc.controls.h, &sc.params, sp, &reg)?;
        ledger.dissipation = d.value;
        ledger.kirchhoff_lower_bound = d.kirchhoff_lower_bound;
        ledger.boundary_work = audit.r + audit.w;
        ledger.step_inequality_residual = audit.inequality_residual;
        let row = SeriesRow {
            t: rec.t,
            mass: phase_totals(next, sp),
            dual_norm: dual_increments(prev, next, sp, &dual)?,
            graph_max_distance: rec.levels.last().map(|l| l.graph.max_distance).unwrap_or(0.0),
            newton_iters: rec.newton_iterations(),
            fp_iters: rec.fp_iterations(),
            ledger: ledger.clone(),
        };
        series.push(&row)?;
        if rec.step.is_multiple_of(cadence) || rec.step == n_steps {
            let name = snapshot_name(rec.step);
            write_file(&out.join(&name), &field_text(next, dim))?;
            snapshots.push(name);
        }
        energies.push(ledger.f_eps);
        times.push(rec.t);
        entries.push(StepEntry {
            step: rec.step,
            t: rec.t,
            newton_iters: row.newton_iters,
            fp_iters: row.fp_iters,
            levels: rec.levels.clone(),
            ledger,
            identity_defect: audit.identity_defect,
            boundary_flux: rec.boundary_flux,
        });
        if !quiet {
            eprintln!(
                "step {:>5}  t = {:.4e}  newton {:>3}  fp {:>3}  F_eps = {:.6e}",
                rec.step, rec.t, row.newton_iters, row.fp_iters, row.ledger.f_eps
            );
        }
        rows.push(row);
        step_seconds.push(tick.elapsed().as_secs_f64());
        tick = Instant::now();
        Ok(())
    };
    let outcome = run_transient(
        init,
        n_steps,
        &sc.controls,
        &sc.params,
        sp,
        &sc.capillary,
        |rec, prev, next| {
            if io_error.is_none() {
                if let Err(e) = on_step(rec, prev, next) {
                    io_error = Some(e);
                }
            }
        },
    );
    if let Some(e) = io_error {
        return Err(e);
    }

    let states = outcome.trajectory.states;
    let balance = mass_balance(&states, sp)?;
    let wc = cfg_weak_coupling(sc);
    let manifest = RunManifest {
        name: cfg.name.clone(),
        config_sha256: sha256_hex(config_text),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: sc.run.seed,
        steps_requested: n_steps,
        steps_completed: states.len() - 1,
        status: if outcome.failure.is_some() { "failed" } else { "ok" }.to_string(),
        failure: outcome.failure.as_ref().map(|e| e.to_string()),
        eps_schedule: sc.controls.eps_schedule.clone(),
        h: sc.controls.h,
        c1_estimate: wc.map(|w| w.0),
        weak_coupling_margin: wc.map(|w| w.1),
        max_relative_mass_drift: balance.max_relative_drift,
        gronwall: gronwall_constants(&times, &energies),
        snapshots,
        steps: entries,
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    write_json(
        &out.join("timing.json"),
        &Timing {
            total_seconds: started.elapsed().as_secs_f64(),
            step_seconds,
        },
    )?;
    Ok(RunReport {
        manifest,
        rows,
        states,
        failure: outcome.failure,
    })
}

fn cfg_weak_coupling(sc: &Scenario) -> Option<(f64, f64)> {
    sc.validation.weak_coupling.as_ref().map(|w| (w.c1_estimate, w.margin))
}
