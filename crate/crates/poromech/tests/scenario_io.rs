mod common;

use std::path::Path;

use common::*;
use poromech::scenario_io::cli::{cli_main, parse_value, set_path, truncate_schedule, EXIT_INVALID, EXIT_OK};
use poromech::scenario_io::*;

const SMALL: &str = r#"
name = "small"

[mesh]
kind = "rectangle"
nx = 4
ny = 4

[boundary]
flow_dirichlet = ["top"]
mechanics_dirichlet = ["bottom"]

[material]
lame_lambda_pa = 2.0
porosity_min = 0.1
porosity_max = 0.4
porosity_rest = 0.25

[capillary]
kind = "brooks-corey"
entry_pressure_pa = 1.0
lambda_bc = 3.0

[initial]
phi_n = 0.0
phi_w = 0.25

[dirichlet]
p_n_pa = 1.375
p_w_pa = -0.625

[controls]
h_s = 0.01
eps_schedule = [1e-2]

[run]
steps = 2
"#;

fn small() -> Config {
    load_config(SMALL).unwrap()
}

fn labels(err: ScenarioError) -> Vec<String> {
    match err {
        ScenarioError::Validation(r) => r.violations.into_iter().map(|v| v.label).collect(),
        other => panic!("expected a validation error, got {other}"),
    }
}

fn cli(args: &[&str]) -> i32 {
    cli_main(std::iter::once("poromech").chain(args.iter().copied()))
}

#[test]
fn minimal_config_defaults() {
    let text = SMALL.replace("[dirichlet]\np_n_pa = 1.375\np_w_pa = -0.625\n", "");
    let text = text.split("[controls]").next().unwrap();
    let cfg = load_config(text).unwrap();
    assert_eq!(cfg.material.viscosity_n_pa_s, 1.0);
    assert_eq!(cfg.material.biot_coefficient, 1.0);
    assert_eq!(cfg.material.gravity_m_s2, [0.0, 0.0]);
    assert_eq!(cfg.controls.h, 0.01);
    assert_eq!(cfg.controls.eps_schedule, vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3]);
    assert_eq!((cfg.run.steps, cfg.run.seed, cfg.run.cadence()), (10, 1, 1));
    let sc = cfg.build().unwrap();
    assert!(sc.params.p_dirichlet[0].iter().all(|v| *v == 0.0));
}

#[test]
fn unknown_keys_are_rejected() {
    let text = SMALL.replace("lame_lambda_pa = 2.0", "lame_lambda = 2.0");
    assert!(matches!(load_config(&text), Err(ScenarioError::Parse(_))));
}

#[test]
fn biot_coefficient_above_one_fails_h1() {
    let mut cfg = small();
    cfg.material.biot_coefficient = 1.5;
    assert!(labels(cfg.build().unwrap_err()).contains(&"H1".to_string()));
}

#[test]
fn shallow_brooks_corey_fails_h2() {
    let text = SMALL.replace("lambda_bc = 3.0", "lambda_bc = 1.5");
    assert!(labels(load_config(&text).unwrap().build().unwrap_err()).contains(&"H2".to_string()));
}

#[test]
fn all_violations_reported_together() {
    let mut cfg = small();
    cfg.material.biot_coefficient = 1.5;
    cfg.material.porosity_rest = FieldSpec::Constant(0.9);
    cfg.initial.phi_w = FieldSpec::Constant(0.6);
    let l = labels(cfg.build().unwrap_err());
    assert!(
        l.iter().filter(|x| *x == "H1").count() >= 2 && l.contains(&"H4".to_string()),
        "{l:?}"
    );
}

#[test]
fn bundled_scenarios_validate() {
    let names: Vec<&str> = bundled_names().collect();
    assert_eq!(names.len(), 4);
    for n in names {
        let r = validate(&bundled_config(n));
        assert!(r.is_ok(), "{n}: {r}");
        assert!(r.weak_coupling.unwrap().satisfied, "{n}");
    }
    assert!(bundled("nonexistent").is_none());
}

#[test]
fn expression_fields() {
    let mut cfg = small();
    cfg.initial.phi_n = FieldSpec::Expression("0.05 + 0.1 * y".into());
    cfg.initial.phi_w = FieldSpec::Expression("0.2 - 0.1 * y".into());
    let sc = cfg.build().unwrap();
    for (x, c) in sc.mesh.coords.iter().zip(&sc.phi0) {
        assert!((c.phi_n - (0.05 + 0.1 * x[1])).abs() < 1e-15);
        assert!((c.phi() - 0.25).abs() < 1e-15);
    }
    cfg.initial.phi_n = FieldSpec::Expression("0.1 * z".into());
    // evaluation errors surface through validation
    assert_eq!(labels(cfg.build().unwrap_err()), ["input"]);
}

#[test]
fn field_text_roundtrip() {
    let sc = small().build().unwrap();
    let reg = poromech::constitutive::RegularizedModel::new(sc.capillary.clone(), 1e-2).unwrap();
    let st = poromech::coupled::init_state(&sc.phi0, &sc.params, &sc.spaces, &reg).unwrap();
    let text = field_text(&st, 2);
    let fields = parse_field_text(&text).unwrap();
    let names: Vec<&str> = fields.iter().map(|f| f.0.as_str()).collect();
    assert_eq!(names, ["phi_n", "phi_w", "u", "theta", "pi", "chi", "p_n", "p_w"]);
    let u: Vec<f64> = fields[2].1.iter().flatten().copied().collect();
    assert_eq!(u, st.u);
    assert_eq!(fields[7].1.iter().map(|r| r[0]).collect::<Vec<_>>(), st.p_w);
    assert!(parse_field_text("1.0\n").is_err());
}

#[test]
fn float_format_roundtrips() {
    for v in [0.1, -1.0 / 3.0, 1e-300, 6.02e23] {
        assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
    }
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn empty_run_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small();
    cfg.run.steps = 0;
    let r = run_scenario(&cfg, SMALL, dir.path(), true).unwrap();
    assert!(r.failure.is_none() && r.rows.is_empty());
    assert_eq!(read(dir.path(), "series.csv"), SERIES_COLUMNS.join(",") + "\n");
    assert!(dir.path().join("fields/step_000000.txt").exists());
    let m: RunManifest = serde_json::from_str(&read(dir.path(), "manifest.json")).unwrap();
    assert_eq!(m.steps_completed, 0);
    assert_eq!(m.config_sha256, sha256_hex(SMALL));
}

#[test]
fn run_outputs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = small();
    let ra = run_scenario(&cfg, SMALL, a.path(), true).unwrap();
    run_scenario(&cfg, SMALL, b.path(), true).unwrap();
    assert_eq!(ra.manifest.steps_completed, 2);
    assert_eq!(ra.states.len(), 3);
    for f in [
        "series.csv",
        "manifest.json",
        "mesh.txt",
        "config.toml",
        "fields/step_000002.txt",
    ] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
    let csv = read(a.path(), "series.csv");
    assert_eq!(csv.lines().count(), 3);
    assert!(csv
        .lines()
        .skip(1)
        .all(|l| l.split(',').count() == SERIES_COLUMNS.len()));
    assert!(a.path().join("timing.json").exists());
}

#[test]
fn audit_battery_passes_on_small_scenario() {
    let sc = small().build().unwrap();
    let checks = audit_battery(&sc, 20).unwrap();
    assert!(!checks.is_empty());
    for c in &checks {
        assert!(c.passed, "{c:?}");
    }
}

#[test]
fn cli_helpers() {
    assert_eq!(truncate_schedule(&[1e-1, 1e-2, 1e-3], 1e-2), vec![1e-1, 1e-2]);
    assert_eq!(truncate_schedule(&[1e-1, 1e-2], 5e-4), vec![1e-1, 1e-2, 5e-4]);
    assert_eq!(parse_value("2.5"), toml::Value::Float(2.5));
    assert_eq!(
        parse_value("[1, 2]"),
        toml::Value::Array(vec![toml::Value::Integer(1), toml::Value::Integer(2)])
    );
    assert_eq!(parse_value("top"), toml::Value::String("top".into()));
    let mut t: toml::Table = toml::from_str(SMALL).unwrap();
    set_path(&mut t, "material.lame_mu_pa", toml::Value::Float(3.0)).unwrap();
    set_path(&mut t, "run.seed", toml::Value::Integer(9)).unwrap();
    assert!(set_path(&mut t, "name.inner", toml::Value::Integer(1)).is_err());
    assert_eq!(t["material"]["lame_mu_pa"].as_float(), Some(3.0));
}

#[test]
fn cli_run_on_invalid_scenario_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, SMALL.replace("[material]", "[material]\nbiot_coefficient = 1.5")).unwrap();
    let out = dir.path().join("out");
    assert_eq!(
        cli(&["run", path.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"]),
        EXIT_INVALID
    );
    assert_eq!(cli(&["check", path.to_str().unwrap()]), EXIT_INVALID);
    assert_eq!(cli(&["check", "builtin:nope"]), EXIT_INVALID);
    assert_eq!(cli(&["frobnicate"]), EXIT_INVALID);
}

#[test]
fn cli_check_and_audit() {
    assert_eq!(cli(&["check", "builtin:equilibrium"]), EXIT_OK);
    assert_eq!(cli(&["check", "--explain", "--config", "builtin:drainage"]), EXIT_OK);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.toml");
    std::fs::write(&path, SMALL).unwrap();
    assert_eq!(
        cli(&["audit", path.to_str().unwrap(), "--samples", "10", "--seed", "4"]),
        EXIT_OK
    );
}

#[test]
fn cli_sweep_creates_one_directory_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.toml");
    std::fs::write(
        &path,
        SMALL.replace("eps_schedule = [1e-2]", "eps_schedule = [1e-1, 1e-2]"),
    )
    .unwrap();
    let out = dir.path().join("sweep");
    let code = cli(&[
        "sweep",
        path.to_str().unwrap(),
        "--param",
        "eps_final",
        "--values",
        "1e-2,1e-3,1e-4",
        "--steps",
        "1",
        "--h",
        "0.001",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let mut dirs: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    dirs.sort();
    assert_eq!(dirs, ["000_eps_final_1e-2", "001_eps_final_1e-3", "002_eps_final_1e-4"]);
    for d in &dirs {
        let m: RunManifest = serde_json::from_str(&read(&out.join(d), "manifest.json")).unwrap();
        assert_eq!(m.steps_completed, 1);
    }
    let m: RunManifest = serde_json::from_str(&read(&out.join(&dirs[2]), "manifest.json")).unwrap();
    assert_eq!(m.eps_schedule, vec![1e-1, 1e-2, 1e-4]);
}
